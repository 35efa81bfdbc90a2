//! JSON problem files.
//!
//! A config holds one problem (dynamics, target, delay), its numerical grids
//! and tolerances, and named experiments. [`ProblemConfig::build`] checks
//! internal consistency and produces a ready-to-run [`Problem`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{HistoryPath, DEFAULT_INTERVALS};
use crate::integrator::{steps_per_delay, ControlSignal, DEFAULT_STEPS_PER_DELAY};
use crate::mintime::{SearchConfig, ValuePolicy, DEFAULT_DEPTH_LIMIT};
use crate::problem::{
    estimate_petrov, planar_directions, Domain, DynamicsSpec, Field, PetrovCertificate, TargetSpec,
};
use crate::regularity::Oracle;
use crate::steering::{derive_constants, SteeringParams, DEFAULT_EPS_REL, DEFAULT_TOL_RATIO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    pub field: Field,
    pub bound_m: f64,
    #[serde(default)]
    pub lipschitz_l: f64,
    #[serde(default)]
    pub semiconcavity_cf: f64,
    /// Lipschitz bound `M_bar` for initial histories; defaults to `bound_m`.
    #[serde(default)]
    pub m_bar: Option<f64>,
    /// Explicit control list.
    #[serde(default)]
    pub controls: Vec<Vec<f64>>,
    /// Append `k` evenly spaced planar unit directions.
    #[serde(default)]
    pub directions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// Shell radius for the `d_K` semiconcavity calibration.
    #[serde(default)]
    pub dk_shell_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsBlock {
    #[serde(default = "default_intervals")]
    pub history_intervals: usize,
    #[serde(default = "default_steps")]
    pub steps_per_delay: usize,
    pub switch_mesh: f64,
    pub horizon: f64,
    #[serde(default = "default_depth")]
    pub depth_limit: usize,
}

fn default_intervals() -> usize {
    DEFAULT_INTERVALS
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_DELAY
}

fn default_depth() -> usize {
    DEFAULT_DEPTH_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PetrovBlock {
    pub sigma: f64,
    #[serde(default = "default_shell_grid")]
    pub shell_grid: usize,
}

fn default_shell_grid() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesBlock {
    #[serde(default = "default_tol_ratio")]
    pub tol_ratio: f64,
    /// Relative slack on the distance bound and the steering budget.
    #[serde(default = "default_tol_bound")]
    pub tol_bound_rel: f64,
    /// Absolute DPP tolerance; derived from the grids when absent.
    #[serde(default)]
    pub tol_dpp: Option<f64>,
    /// Absolute steering termination distance; relative default when absent.
    #[serde(default)]
    pub eps_target: Option<f64>,
}

fn default_tol_ratio() -> f64 {
    DEFAULT_TOL_RATIO
}

fn default_tol_bound() -> f64 {
    0.01
}

impl Default for TolerancesBlock {
    fn default() -> Self {
        Self {
            tol_ratio: DEFAULT_TOL_RATIO,
            tol_bound_rel: 0.01,
            tol_dpp: None,
            eps_target: None,
        }
    }
}

/// A history given by its samples on the uniform grid, or a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistorySpec {
    Constant(Vec<f64>),
    /// `x(s) = head + s * slope`.
    Linear { head: Vec<f64>, slope: Vec<f64> },
    /// Grid samples from `s = -tau` to `s = 0`.
    Samples(Vec<Vec<f64>>),
}

impl HistorySpec {
    pub fn build(&self, tau: f64, intervals: usize) -> Result<HistoryPath> {
        match self {
            HistorySpec::Constant(v) => HistoryPath::constant(v, tau, intervals),
            HistorySpec::Linear { head, slope } => {
                if head.len() != slope.len() {
                    return Err(Error::Shape("linear history: head and slope lengths differ".into()));
                }
                HistoryPath::from_fn(head.len(), tau, intervals, |s| {
                    head.iter().zip(slope).map(|(h, m)| h + s * m).collect()
                })
            }
            HistorySpec::Samples(rows) => HistoryPath::new(tau, rows),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DppExperiment {
    pub history: String,
    pub probes: Vec<f64>,
    /// Control words, one index per switching-mesh cell.
    pub words: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyExperiment {
    pub base: String,
    pub family: String,
    /// Boundary-lemma radius; derived from the steering constants when absent.
    #[serde(default)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentsBlock {
    #[serde(default)]
    pub histories: BTreeMap<String, HistorySpec>,
    #[serde(default)]
    pub perturbations: BTreeMap<String, Vec<HistorySpec>>,
    #[serde(default)]
    pub dpp: Option<DppExperiment>,
    /// History names; all histories when empty.
    #[serde(default)]
    pub distance_bound: Vec<String>,
    /// Pairs of history names.
    #[serde(default)]
    pub lipschitz: Vec<(String, String)>,
    #[serde(default)]
    pub semiconcavity: Option<FamilyExperiment>,
    #[serde(default)]
    pub boundary_lemma: Option<FamilyExperiment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub dynamics: DynamicsBlock,
    pub target: TargetBlock,
    pub tau: f64,
    pub grids: GridsBlock,
    pub petrov: PetrovBlock,
    #[serde(default)]
    pub tolerances: TolerancesBlock,
    /// Box for sampled hypothesis checks.
    pub domain: Domain,
    #[serde(default)]
    pub experiments: ExperimentsBlock,
}

impl ProblemConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {} column {}: {}", e.line(), e.column(), e))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn build(&self) -> Result<Problem> {
        let cfg_err = |field: &str, e: Error| Error::Config(format!("{field}: {}", config_msg(e)));
        let t = &self.tolerances;
        let positive = [
            ("tolerances.tol_ratio", Some(t.tol_ratio)),
            ("tolerances.tol_bound_rel", Some(t.tol_bound_rel)),
            ("tolerances.tol_dpp", t.tol_dpp),
            ("tolerances.eps_target", t.eps_target),
        ];
        for (field, v) in positive {
            if let Some(v) = v.filter(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!("{field}: must be positive, got {v}")));
            }
        }
        let d = &self.dynamics;
        let mut controls = d.controls.clone();
        if let Some(k) = d.directions {
            controls.extend(planar_directions(k));
        }
        let target = TargetSpec::new(self.target.centers.clone(), self.target.radii.clone())
            .map_err(|e| cfg_err("target", e))?;
        let dyn_ = DynamicsSpec::new(
            d.field.clone(),
            target.dim(),
            d.bound_m,
            d.lipschitz_l,
            d.semiconcavity_cf,
            controls,
        )
        .map_err(|e| cfg_err("dynamics", e))?;
        let m_bar = d.m_bar.unwrap_or(d.bound_m);
        if m_bar < d.bound_m {
            return Err(Error::Config(format!(
                "dynamics.m_bar: {m_bar} is below bound_m = {}",
                d.bound_m
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau: must be positive, got {}", self.tau)));
        }
        let g = &self.grids;
        if g.steps_per_delay == 0 || g.history_intervals == 0 {
            return Err(Error::Config(
                "grids: steps_per_delay and history_intervals must be positive".into(),
            ));
        }
        let dt = self.tau / g.steps_per_delay as f64;
        steps_per_delay(self.tau, dt).map_err(|e| cfg_err("grids.steps_per_delay", e))?;
        steps_per_delay(g.switch_mesh, dt).map_err(|_| {
            Error::Config(format!(
                "grids.switch_mesh: {} is not a multiple of dt = {}",
                g.switch_mesh, dt
            ))
        })?;
        let mut search = SearchConfig::new(g.switch_mesh, g.horizon, dt);
        search.depth_limit = g.depth_limit;
        if !(g.horizon >= g.switch_mesh) {
            return Err(Error::Config("grids.horizon: must be at least switch_mesh".into()));
        }
        if self.domain.dim() != target.dim() {
            return Err(Error::Config(format!(
                "domain: dimension {} differs from state dimension {}",
                self.domain.dim(),
                target.dim()
            )));
        }
        if !(self.petrov.sigma > 0.0) || self.petrov.shell_grid == 0 {
            return Err(Error::Config("petrov: need sigma > 0 and shell_grid > 0".into()));
        }

        let mut histories = BTreeMap::new();
        for (name, spec) in &self.experiments.histories {
            let h = spec
                .build(self.tau, g.history_intervals)
                .map_err(|e| cfg_err(&format!("experiments.histories.{name}"), e))?;
            check_dim(&h, target.dim(), &format!("experiments.histories.{name}"))?;
            histories.insert(name.clone(), h);
        }
        let mut families = BTreeMap::new();
        for (name, specs) in &self.experiments.perturbations {
            let mut fam = Vec::new();
            for (i, spec) in specs.iter().enumerate() {
                let field = format!("experiments.perturbations.{name}[{i}]");
                let h = spec
                    .build(self.tau, g.history_intervals)
                    .map_err(|e| cfg_err(&field, e))?;
                check_dim(&h, target.dim(), &field)?;
                fam.push(h);
            }
            families.insert(name.clone(), fam);
        }
        let problem = Problem {
            name: self.name.clone(),
            dyn_,
            target,
            tau: self.tau,
            dt,
            m_bar,
            history_intervals: g.history_intervals,
            search,
            petrov: self.petrov.clone(),
            tolerances: self.tolerances.clone(),
            domain: self.domain.clone(),
            histories,
            families,
            experiments: self.experiments.clone(),
        };
        problem.check_references()?;
        Ok(problem)
    }
}

fn config_msg(e: Error) -> String {
    match e {
        Error::Shape(m) | Error::Invalid(m) | Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn check_dim(h: &HistoryPath, dim: usize, field: &str) -> Result<()> {
    if h.dim() != dim {
        return Err(Error::Config(format!(
            "{field}: history has dimension {}, state dimension is {dim}",
            h.dim()
        )));
    }
    Ok(())
}

/// A validated problem with its histories built.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub dyn_: DynamicsSpec,
    pub target: TargetSpec,
    pub tau: f64,
    pub dt: f64,
    pub m_bar: f64,
    pub history_intervals: usize,
    pub search: SearchConfig,
    pub petrov: PetrovBlock,
    pub tolerances: TolerancesBlock,
    pub domain: Domain,
    pub histories: BTreeMap<String, HistoryPath>,
    pub families: BTreeMap<String, Vec<HistoryPath>>,
    pub experiments: ExperimentsBlock,
}

impl Problem {
    fn check_references(&self) -> Result<()> {
        let e = &self.experiments;
        let mut names: Vec<(String, &str)> = Vec::new();
        if let Some(d) = &e.dpp {
            names.push(("experiments.dpp.history".into(), &d.history));
            for (i, w) in d.words.iter().enumerate() {
                if let Some(c) = w.iter().find(|c| **c >= self.dyn_.n_controls()) {
                    return Err(Error::Config(format!(
                        "experiments.dpp.words[{i}]: control index {c} out of range"
                    )));
                }
            }
        }
        for n in &e.distance_bound {
            names.push(("experiments.distance_bound".into(), n));
        }
        for (a, b) in &e.lipschitz {
            names.push(("experiments.lipschitz".into(), a));
            names.push(("experiments.lipschitz".into(), b));
        }
        for (key, fam) in [("semiconcavity", &e.semiconcavity), ("boundary_lemma", &e.boundary_lemma)] {
            if let Some(f) = fam {
                names.push((format!("experiments.{key}.base"), &f.base));
                if !self.families.contains_key(&f.family) {
                    return Err(Error::Config(format!(
                        "experiments.{key}.family: unknown perturbation family '{}'",
                        f.family
                    )));
                }
            }
        }
        for (field, n) in names {
            if !self.histories.contains_key(n) {
                return Err(Error::Config(format!("{field}: unknown history '{n}'")));
            }
        }
        Ok(())
    }

    pub fn history(&self, name: &str) -> Result<&HistoryPath> {
        self.histories
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown history '{name}'")))
    }

    pub fn family(&self, name: &str) -> Result<&[HistoryPath]> {
        self.families
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("unknown perturbation family '{name}'")))
    }

    pub fn petrov_certificate(&self) -> Result<PetrovCertificate> {
        estimate_petrov(&self.dyn_, &self.target, self.petrov.sigma, self.petrov.shell_grid)
    }

    /// Steering constants from the certified Petrov margin.
    pub fn steering_params(&self, cert: &PetrovCertificate) -> Result<SteeringParams> {
        let mut p = derive_constants(
            cert.mu,
            cert.sigma,
            self.dyn_.bound_m,
            self.m_bar,
            self.dyn_.lipschitz_l,
            self.tau,
        )?;
        p.tol_ratio = self.tolerances.tol_ratio;
        p.tol_steer_rel = self.tolerances.tol_bound_rel;
        p.eps_target = self.tolerances.eps_target;
        if p.eps_target.is_none() {
            p.eps_rel = DEFAULT_EPS_REL;
        }
        Ok(p)
    }

    pub fn oracle(&self) -> Oracle<'_> {
        let mut o = Oracle::new(&self.dyn_, &self.target, ValuePolicy::auto(self.search.clone()));
        o.dpp_override = self.tolerances.tol_dpp;
        o
    }

    pub fn dpp_controls(&self) -> Result<Vec<ControlSignal>> {
        match &self.experiments.dpp {
            Some(d) => d
                .words
                .iter()
                .map(|w| ControlSignal::from_word(w, self.search.switch_mesh))
                .collect(),
            None => Ok(Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{
        "name": "line",
        "dynamics": {"field": {"kind": "unit_speed"}, "bound_m": 1.0, "controls": [[-1.0], [1.0]]},
        "target": {"centers": [[0.0]], "radii": [1.0]},
        "tau": 0.5,
        "grids": {"history_intervals": 16, "steps_per_delay": 64, "switch_mesh": 0.25, "horizon": 3.0},
        "petrov": {"sigma": 1.0, "shell_grid": 16},
        "domain": {"lower": [-3.0], "upper": [3.0]},
        "experiments": {
            "histories": {"far": {"constant": [2.0]}, "ramp": {"linear": {"head": [1.5], "slope": [0.5]}}},
            "lipschitz": [["far", "ramp"]]
        }
    }"#;

    #[test]
    fn builds_line_problem() {
        let p = ProblemConfig::from_json_str(LINE).unwrap().build().unwrap();
        assert_eq!(p.dt, 0.5 / 64.0);
        assert_eq!(p.history("ramp").unwrap().sample(0), &[1.25]);
        let cert = p.petrov_certificate().unwrap();
        let params = p.steering_params(&cert).unwrap();
        assert!((params.c_bound - 1.866).abs() < 1e-3);
    }

    #[test]
    fn rejects_misaligned_mesh() {
        let text = LINE.replace("\"switch_mesh\": 0.25", "\"switch_mesh\": 0.3");
        let e = ProblemConfig::from_json_str(&text).unwrap().build().unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.starts_with("grids.switch_mesh")), "{e}");
    }

    #[test]
    fn reports_parse_position() {
        let e = ProblemConfig::from_json_str("{\n  \"name\": 3\n}").unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.starts_with("line 2")), "{e}");
    }

    #[test]
    fn rejects_unknown_history_reference() {
        let text = LINE.replace("[\"far\", \"ramp\"]", "[\"far\", \"nope\"]");
        let e = ProblemConfig::from_json_str(&text).unwrap().build().unwrap_err();
        assert!(matches!(&e, Error::Config(m) if m.contains("nope")), "{e}");
    }
}
