//! Empirical certification of the regularity of the minimum time functional.
//!
//! Every check evaluates `T̂` through one [`Oracle`], so all values compared
//! within a report share the same mesh, horizon and control grid. Samples
//! are evaluated in parallel and collected in input order.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{HistoryPath, LipschitzClass};
use crate::integrator::{integrate, ControlSignal, TOL_THETA_REL};
use crate::mintime::{self, ValuePolicy};
use crate::problem::{DynamicsSpec, TargetSpec};
use crate::report::{fmt_num, hash_values, write_rows};
use crate::steering::SteeringParams;

/// Dyadic scales for second differences.
pub const SCALES: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Reports with more than this fraction of skipped samples are inconclusive.
pub const MAX_SKIP_FRACTION: f64 = 0.2;

/// Boundary points are accepted when `|gap| <= TOL_BOUNDARY`.
pub const TOL_BOUNDARY: f64 = 1e-9;

/// Evaluator of `T̂` shared by all samples of a certification.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    pub dyn_: &'a DynamicsSpec,
    pub target: &'a TargetSpec,
    pub policy: ValuePolicy,
    /// Fixed DPP tolerance replacing `2 (tol_theta + mesh slack)`.
    pub dpp_override: Option<f64>,
}

impl<'a> Oracle<'a> {
    pub fn new(dyn_: &'a DynamicsSpec, target: &'a TargetSpec, policy: ValuePolicy) -> Self {
        Self {
            dyn_,
            target,
            policy,
            dpp_override: None,
        }
    }

    /// `T̂(x)`, or `None` when no searched control reaches K.
    pub fn value(&self, x: &HistoryPath) -> Result<Option<f64>> {
        Ok(mintime::value(x, self.dyn_, self.target, &self.policy)?.map(|r| r.value))
    }

    pub fn dt(&self) -> f64 {
        self.policy.search.dt
    }

    /// Absolute accuracy of a single hitting time near `t`.
    pub fn tol_theta(&self, t: f64) -> f64 {
        TOL_THETA_REL * t.max(1.0)
    }

    /// Resolution slack of the discretisation: one step of travel at speed M.
    pub fn mesh_slack(&self) -> f64 {
        self.dyn_.bound_m * self.dt()
    }

    /// `2 (tol_theta + mesh slack)` unless overridden.
    pub fn dpp_tolerance(&self, t: f64) -> f64 {
        if let Some(tol) = self.dpp_override {
            return tol;
        }
        2.0 * (self.tol_theta(t) + self.mesh_slack())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl ReportVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ReportVerdict::Pass => "pass",
            ReportVerdict::Fail => "fail",
            ReportVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// One checked inequality `lhs <= rhs + tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub id: usize,
    pub inputs_hash: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl SampleRow {
    fn checked(id: usize, inputs_hash: String, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = if lhs <= rhs + tol { Verdict::Pass } else { Verdict::Fail };
        Self {
            id,
            inputs_hash,
            lhs,
            rhs,
            tol,
            verdict,
            note: String::new(),
        }
    }

    fn skipped(id: usize, inputs_hash: String, note: impl Into<String>) -> Self {
        Self {
            id,
            inputs_hash,
            lhs: f64::NAN,
            rhs: f64::NAN,
            tol: 0.0,
            verdict: Verdict::Skip,
            note: note.into(),
        }
    }

    /// `lhs - rhs - tol`; positive means the inequality failed.
    pub fn violation(&self) -> f64 {
        self.lhs - self.rhs - self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub check: String,
    pub samples: usize,
    pub skipped: usize,
    /// Largest `lhs - rhs - tol` over evaluated samples; `<= 0` passes.
    pub worst_violation: f64,
    pub witness: Option<String>,
    /// Largest per-sample tolerance used.
    pub tolerance: f64,
    pub constants: Vec<(String, f64)>,
    /// Scale stability of second-difference ratios, for checks that have one.
    pub stable: Option<bool>,
    pub notes: Vec<String>,
    pub rows: Vec<SampleRow>,
    pub verdict: ReportVerdict,
}

impl CertificationReport {
    fn finish(
        check: &str,
        rows: Vec<SampleRow>,
        constants: Vec<(String, f64)>,
        stable: Option<bool>,
        mut notes: Vec<String>,
    ) -> Self {
        let samples = rows.len();
        let skipped = rows.iter().filter(|r| r.verdict == Verdict::Skip).count();
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        for r in rows.iter().filter(|r| r.verdict != Verdict::Skip) {
            if r.violation() > worst {
                worst = r.violation();
                witness = Some(format!("sample {} (inputs {})", r.id, r.inputs_hash));
            }
        }
        let tolerance = rows.iter().map(|r| r.tol).fold(0.0, f64::max);
        for r in rows.iter().filter(|r| r.verdict == Verdict::Skip) {
            notes.push(format!("sample {} skipped: {}", r.id, r.note));
        }
        let verdict = if samples == 0
            || skipped == samples
            || skipped as f64 > MAX_SKIP_FRACTION * samples as f64
        {
            ReportVerdict::Inconclusive
        } else if worst > 0.0 || stable == Some(false) {
            ReportVerdict::Fail
        } else {
            ReportVerdict::Pass
        };
        Self {
            check: check.to_string(),
            samples,
            skipped,
            worst_violation: worst,
            witness,
            tolerance,
            constants,
            stable,
            notes,
            rows,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == ReportVerdict::Pass
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("check: {}\nverdict: {}\n", self.check, self.verdict.name());
        s += &format!("samples: {} (skipped {})\n", self.samples, self.skipped);
        s += &format!("worst violation: {}\n", fmt_num(self.worst_violation));
        s += &format!("tolerance: {}\n", fmt_num(self.tolerance));
        if let Some(w) = &self.witness {
            s += &format!("witness: {w}\n");
        }
        if let Some(st) = self.stable {
            s += &format!("stable across scales: {st}\n");
        }
        for (k, v) in &self.constants {
            s += &format!("{k} = {}\n", fmt_num(*v));
        }
        for n in &self.notes {
            s += &format!("note: {n}\n");
        }
        s
    }

    /// Columns `sample_id, inputs_hash, lhs, rhs, slack, verdict`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.to_string(),
                    r.inputs_hash.clone(),
                    fmt_num(r.lhs),
                    fmt_num(r.rhs),
                    fmt_num(-r.violation()),
                    r.verdict.name().to_string(),
                ]
            })
            .collect();
        write_rows(
            out,
            &["sample_id", "inputs_hash", "lhs", "rhs", "slack", "verdict"],
            &rows,
        )
    }
}

fn path_hash(paths: &[&HistoryPath], extra: &[f64]) -> String {
    hash_values(
        paths
            .iter()
            .flat_map(|p| p.as_flat().iter().copied())
            .chain(extra.iter().copied()),
    )
}

fn control_values(u: &ControlSignal) -> Vec<f64> {
    u.segments()
        .into_iter()
        .flat_map(|(t, c)| [t, c as f64])
        .collect()
}

/// Check `T̂(x0) <= t + T̂(y_t(x0, u))` for every probe time and control.
pub fn check_dpp(
    x0: &HistoryPath,
    oracle: &Oracle,
    t_probes: &[f64],
    controls: &[ControlSignal],
) -> Result<CertificationReport> {
    let t0 = oracle
        .value(x0)?
        .ok_or_else(|| Error::Invalid("T̂(x0) is undefined: no control reaches K".into()))?;
    let pairs: Vec<(f64, &ControlSignal)> = controls
        .iter()
        .flat_map(|u| t_probes.iter().map(move |t| (*t, u)))
        .collect();
    let rows = pairs
        .par_iter()
        .enumerate()
        .map(|(id, (t, u))| dpp_row(id, x0, oracle, t0, *t, u))
        .collect::<Result<Vec<_>>>()?;
    Ok(CertificationReport::finish(
        "dynamic programming principle",
        rows,
        vec![
            ("T_hat(x0)".into(), t0),
            ("mesh_slack".into(), oracle.mesh_slack()),
        ],
        None,
        Vec::new(),
    ))
}

fn dpp_row(
    id: usize,
    x0: &HistoryPath,
    oracle: &Oracle,
    t0: f64,
    t: f64,
    u: &ControlSignal,
) -> Result<SampleRow> {
    let mut extra = control_values(u);
    extra.push(t);
    let hash = path_hash(&[x0], &extra);
    let tol = oracle.dpp_tolerance(t0);
    if t < 0.0 || t > t0 + tol {
        return Ok(SampleRow::skipped(id, hash, format!("probe t = {} outside [0, T̂(x0)]", fmt_num(t))));
    }
    if t == 0.0 {
        return Ok(SampleRow::checked(id, hash, t0, t0, tol));
    }
    let traj = integrate(x0, u, oracle.dyn_, t, oracle.dt())?;
    let shifted = traj.history_at(traj.t_end())?;
    match oracle.value(&shifted)? {
        Some(ts) => Ok(SampleRow::checked(id, hash, t0, traj.t_end() + ts, tol)),
        None => Ok(SampleRow::skipped(id, hash, "no hit within horizon for the shifted state")),
    }
}

/// Check `T̂(x) <= C d_K(x(0))` with relative slack `tol_rel`.
pub fn check_distance_bound(
    samples: &[HistoryPath],
    oracle: &Oracle,
    params: &SteeringParams,
    tol_rel: f64,
) -> Result<CertificationReport> {
    let class = LipschitzClass::new(params.m_bar);
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(id, x)| {
            let hash = path_hash(&[x], &[]);
            if !class.contains(x) {
                return Ok(SampleRow::skipped(id, hash, "history outside the Lipschitz class"));
            }
            let d0 = oracle.target.distance(x.head());
            if d0 >= params.delta {
                return Ok(SampleRow::skipped(id, hash, "x(0) outside K_delta"));
            }
            let rhs = params.c_bound * d0;
            match oracle.value(x)? {
                Some(t) => Ok(SampleRow::checked(id, hash, t, rhs, tol_rel * rhs + oracle.tol_theta(t))),
                None => Ok(SampleRow::skipped(id, hash, "no hit within horizon")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CertificationReport::finish(
        "distance bound",
        rows,
        vec![
            ("C".into(), params.c_bound),
            ("k".into(), params.k_contraction),
            ("delta".into(), params.delta),
        ],
        None,
        Vec::new(),
    ))
}

/// Theoretical modulus `C (1 + L tau) e^{L t_max}`.
pub fn lipschitz_modulus(params: &SteeringParams, t_max: f64) -> f64 {
    params.c_bound * (1.0 + params.l * params.tau) * (params.l * t_max).exp()
}

/// Radius `delta e^{-L(T̂+1)} / (1 + L tau)` within which the modulus applies.
pub fn lipschitz_radius(params: &SteeringParams, t_hat: f64) -> f64 {
    params.delta * (-params.l * (t_hat + 1.0)).exp() / (1.0 + params.l * params.tau)
}

/// Check `|T̂(x) - T̂(x̃)| <= modulus * |x - x̃|` for each admissible pair.
pub fn estimate_lipschitz(
    pairs: &[(HistoryPath, HistoryPath)],
    oracle: &Oracle,
    params: &SteeringParams,
) -> Result<CertificationReport> {
    let class = LipschitzClass::new(params.m_bar);
    let evaluated = pairs
        .par_iter()
        .enumerate()
        .map(|(id, (x, xt))| -> Result<(SampleRow, f64, f64)> {
            let hash = path_hash(&[x, xt], &[]);
            if !class.contains(x) || !class.contains(xt) {
                return Ok((SampleRow::skipped(id, hash, "path outside the Lipschitz class"), 0.0, 0.0));
            }
            let dist = x.diff(xt)?.sup_norm();
            let (Some(ta), Some(tb)) = (oracle.value(x)?, oracle.value(xt)?) else {
                return Ok((SampleRow::skipped(id, hash, "no hit within horizon"), 0.0, 0.0));
            };
            let t_max = ta.max(tb);
            if dist > lipschitz_radius(params, t_max) {
                return Ok((SampleRow::skipped(id, hash, "pair outside the Lipschitz radius"), 0.0, 0.0));
            }
            let lhs = (ta - tb).abs();
            let modulus = lipschitz_modulus(params, t_max);
            let ratio = if dist > 0.0 { lhs / dist } else { 0.0 };
            let tol = 2.0 * oracle.tol_theta(t_max);
            Ok((SampleRow::checked(id, hash, lhs, modulus * dist, tol), ratio, modulus))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = evaluated.iter().map(|e| e.1).fold(0.0, f64::max);
    let max_modulus = evaluated.iter().map(|e| e.2).fold(0.0, f64::max);
    let rows = evaluated.into_iter().map(|e| e.0).collect();
    Ok(CertificationReport::finish(
        "Lipschitz modulus",
        rows,
        vec![
            ("C".into(), params.c_bound),
            ("max_empirical_ratio".into(), max_ratio),
            ("max_modulus".into(), max_modulus),
        ],
        None,
        Vec::new(),
    ))
}

/// Ratios per scale are stable when consecutive positive parts stay within a
/// factor 2 of each other, up to the evaluation noise `floor`.
pub fn ratios_stable(ratios: &[f64], floor: &[f64]) -> bool {
    ratios.windows(2).zip(floor.windows(2)).all(|(r, f)| {
        let (a, b) = (r[0].max(0.0), r[1].max(0.0));
        let fl = f[0].max(f[1]);
        b <= 2.0 * a + fl && a <= 2.0 * b + fl
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiconcavityEstimate {
    /// Empirical constant: the largest ratio over all samples and scales.
    pub modulus: f64,
    /// `lambda * max |h|` at each scale.
    pub h_scales: Vec<f64>,
    /// Largest `Delta^2 / (lambda |h|)^2` at each scale.
    pub ratio_by_scale: Vec<f64>,
    pub stable: bool,
    /// Per sample and scale: `(sample, lambda, Delta^2, ratio)`.
    pub details: Vec<(usize, f64, f64, f64)>,
    pub skipped: Vec<(usize, String)>,
}

impl SemiconcavityEstimate {
    pub fn to_report(&self, check: &str) -> CertificationReport {
        let rows = self
            .details
            .iter()
            .enumerate()
            .map(|(id, (sample, lam, d2, ratio))| {
                let hash = hash_values([*sample as f64, *lam]);
                let norm2 = if *ratio != 0.0 { d2 / ratio } else { 0.0 };
                SampleRow::checked(id, hash, *d2, self.modulus * norm2, TOL_THETA_REL)
            })
            .chain(self.skipped.iter().map(|(s, note)| {
                SampleRow::skipped(self.details.len() + s, hash_values([*s as f64]), note.clone())
            }))
            .collect();
        let mut constants = vec![("modulus".to_string(), self.modulus)];
        for (h, r) in self.h_scales.iter().zip(&self.ratio_by_scale) {
            constants.push((format!("ratio_at_h={}", fmt_num(*h)), *r));
        }
        CertificationReport::finish(check, rows, constants, Some(self.stable), Vec::new())
    }
}

fn require_semiconcavity_delay(params: &SteeringParams) -> Result<()> {
    let limit = params.semiconcavity_tau_threshold();
    if params.tau >= limit {
        return Err(Error::DelayTooLarge {
            tau: params.tau,
            threshold: limit,
            rule: "mu/(6*M*L)",
        });
    }
    Ok(())
}

// per-h outcome: ratios per scale with their noise floors, or a skip note
type Ladder = std::result::Result<Vec<(f64, f64, f64)>, String>;

fn aggregate(
    ladders: Vec<Ladder>,
    h_norm_max: f64,
) -> SemiconcavityEstimate {
    let mut details = Vec::new();
    let mut skipped = Vec::new();
    let mut ratio_by_scale = vec![f64::NEG_INFINITY; SCALES.len()];
    let mut stable = true;
    for (i, ladder) in ladders.into_iter().enumerate() {
        match ladder {
            Ok(entries) => {
                let ratios: Vec<f64> = entries.iter().map(|e| e.1).collect();
                let floors: Vec<f64> = entries.iter().map(|e| e.2).collect();
                stable &= ratios_stable(&ratios, &floors);
                for (s, (d2, ratio, _)) in entries.into_iter().enumerate() {
                    ratio_by_scale[s] = ratio_by_scale[s].max(ratio);
                    details.push((i, SCALES[s], d2, ratio));
                }
            }
            Err(note) => skipped.push((i, note)),
        }
    }
    let modulus = ratio_by_scale.iter().copied().fold(0.0, f64::max);
    SemiconcavityEstimate {
        modulus,
        h_scales: SCALES.iter().map(|l| l * h_norm_max).collect(),
        ratio_by_scale,
        stable,
        details,
        skipped,
    }
}

/// Second differences `T̂(x+λh) + T̂(x-λh) - 2T̂(x)` over dyadic scales.
pub fn estimate_semiconcavity(
    x: &HistoryPath,
    h_family: &[HistoryPath],
    oracle: &Oracle,
    params: &SteeringParams,
) -> Result<SemiconcavityEstimate> {
    require_semiconcavity_delay(params)?;
    if oracle.target.contains(x.head()) {
        return Err(Error::Invalid("semiconcavity base point must have x(0) outside K".into()));
    }
    let class = LipschitzClass::new(params.m);
    if !class.contains(x) {
        return Err(Error::Invalid("base history outside the Lipschitz class".into()));
    }
    let t0 = oracle
        .value(x)?
        .ok_or_else(|| Error::Invalid("T̂(x) is undefined: no control reaches K".into()))?;
    let ladders = h_family
        .par_iter()
        .map(|h| -> Result<Ladder> {
            let norm = h.sup_norm();
            let mut out = Vec::new();
            for lam in SCALES {
                let plus = x.combine(h, lam)?;
                let minus = x.combine(h, -lam)?;
                if !class.contains(&plus) || !class.contains(&minus) {
                    return Ok(Err("x +- h outside the Lipschitz class".into()));
                }
                if oracle.target.contains(plus.head()) || oracle.target.contains(minus.head()) {
                    return Ok(Err("x +- h enters K".into()));
                }
                let (Some(tp), Some(tm)) = (oracle.value(&plus)?, oracle.value(&minus)?) else {
                    return Ok(Err("no hit within horizon".into()));
                };
                let d2 = tp + tm - 2.0 * t0;
                let scale2 = (lam * norm).powi(2);
                if scale2 == 0.0 {
                    out.push((d2, 0.0, 0.0));
                } else {
                    let noise = 4.0 * oracle.tol_theta(tp.max(tm).max(t0));
                    out.push((d2, d2 / scale2, noise / scale2));
                }
            }
            Ok(Ok(out))
        })
        .collect::<Result<Vec<_>>>()?;
    let h_norm_max = h_family.iter().map(|h| h.sup_norm()).fold(0.0, f64::max);
    Ok(aggregate(ladders, h_norm_max))
}

/// Smallness radius `0.99 min(delta, r) / (2 (1 + 2 M C))` for the boundary lemma.
pub fn lemma_radius(params: &SteeringParams, dk_shell_r: f64) -> f64 {
    0.99 * params.delta.min(dk_shell_r) / (2.0 * (1.0 + 2.0 * params.m * params.c_bound))
}

/// Check `T̂(x+2h) - 2T̂(x+h) <= k |h|^2` at a boundary point with an
/// empirical, scale-stable `k`.
pub fn check_boundary_lemma(
    x: &HistoryPath,
    h_family: &[HistoryPath],
    oracle: &Oracle,
    params: &SteeringParams,
    rho: f64,
) -> Result<CertificationReport> {
    let gap = oracle.target.gap(x.head());
    if gap.abs() > TOL_BOUNDARY {
        return Err(Error::Invalid(format!(
            "x(0) is not on the boundary of K: signed gap {}",
            fmt_num(gap)
        )));
    }
    let class = LipschitzClass::new(params.m);
    if !class.contains(x) {
        return Err(Error::Invalid("base history outside the Lipschitz class".into()));
    }
    let ladders = h_family
        .par_iter()
        .map(|h| -> Result<Ladder> {
            let norm = h.sup_norm();
            if norm > rho {
                return Ok(Err(format!("|h| = {} exceeds rho = {}", fmt_num(norm), fmt_num(rho))));
            }
            let mut out = Vec::new();
            for lam in SCALES {
                let one = x.combine(h, lam)?;
                let two = x.combine(h, 2.0 * lam)?;
                if oracle.target.contains(one.head()) {
                    return Ok(Err("(x + h)(0) lies in K".into()));
                }
                if !class.contains(&one) || !class.contains(&two) {
                    return Ok(Err("x + h outside the Lipschitz class".into()));
                }
                let (Some(t1), Some(t2)) = (oracle.value(&one)?, oracle.value(&two)?) else {
                    return Ok(Err("no hit within horizon".into()));
                };
                let q = t2 - 2.0 * t1;
                let scale2 = (lam * norm).powi(2);
                let noise = 3.0 * oracle.tol_theta(t2.max(t1));
                out.push((q, q / scale2, noise / scale2));
            }
            Ok(Ok(out))
        })
        .collect::<Result<Vec<_>>>()?;
    let h_norm_max = h_family.iter().map(|h| h.sup_norm()).fold(0.0, f64::max);
    let est = aggregate(ladders, h_norm_max);
    let mut report = est.to_report("boundary lemma");
    report.constants.push(("rho".into(), rho));
    report.constants[0].0 = "k_emp".into();
    Ok(report)
}
