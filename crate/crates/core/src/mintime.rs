//! Reference values of the minimum time functional.
//!
//! [`min_time_search`] is a depth-first branch and bound over control words
//! with one control index per mesh cell, pruned by the lower bound
//! `t + d_K(y(t)) / M`. [`min_time_analytic`] handles unit-speed dynamics,
//! where the state never enters the field and straight-line motion along a
//! constant control is available in closed form.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::HistoryPath;
use crate::integrator::{
    bisect_entry, extend_constant, integrate, steps_per_delay, ControlSignal, TOL_THETA_REL,
};
use crate::point;
use crate::problem::{DynamicsSpec, Field, TargetSpec};
use crate::report::{fmt_num, write_rows};
use crate::steering::{steer, SteeringParams};

/// Default cap on the number of mesh cells in a control word.
pub const DEFAULT_DEPTH_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Search,
    SteeringBound,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Search => "search",
            Method::SteeringBound => "steering_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinTimeResult {
    /// Upper estimate of the minimum time.
    pub value: f64,
    pub control: ControlSignal,
    pub method: Method,
    /// Switching mesh; 0 for constant analytic controls.
    pub mesh: f64,
    pub nodes_explored: usize,
}

impl MinTimeResult {
    /// Hitting time of the stored control when replayed from `x0`.
    pub fn replay(
        &self,
        x0: &HistoryPath,
        dyn_: &DynamicsSpec,
        target: &TargetSpec,
        dt: f64,
    ) -> Result<Option<f64>> {
        if target.contains(x0.head()) {
            return Ok(Some(0.0));
        }
        let t_end = self.value + 2.0 * dt;
        let traj = integrate(x0, &self.control, dyn_, t_end, dt)?;
        Ok(traj.hitting_time(target))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub switch_mesh: f64,
    pub horizon: f64,
    pub dt: f64,
    pub depth_limit: usize,
    pub prune: bool,
}

impl SearchConfig {
    pub fn new(switch_mesh: f64, horizon: f64, dt: f64) -> Self {
        Self {
            switch_mesh,
            horizon,
            dt,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            prune: true,
        }
    }

    fn cells(&self) -> Result<(usize, usize)> {
        let cell_steps = steps_per_delay(self.switch_mesh, self.dt)
            .map_err(|_| Error::Config(format!(
                "switch_mesh {} is not a multiple of dt {}",
                self.switch_mesh, self.dt
            )))?;
        if !(self.horizon >= self.switch_mesh * (1.0 - 1e-12)) {
            return Err(Error::Config(format!(
                "horizon {} is shorter than switch_mesh {}",
                self.horizon, self.switch_mesh
            )));
        }
        let n_cells = (self.horizon / self.switch_mesh - 1e-9).ceil().max(1.0) as usize;
        if n_cells > self.depth_limit {
            return Err(Error::Budget {
                cells: n_cells,
                limit: self.depth_limit,
            });
        }
        Ok((cell_steps, n_cells))
    }
}

struct Search<'a> {
    dyn_: &'a DynamicsSpec,
    target: &'a TargetSpec,
    n: usize,
    p: usize,
    dt: f64,
    cell_steps: usize,
    n_cells: usize,
    horizon: f64,
    prune: bool,
    best: f64,
    best_word: Vec<usize>,
    word: Vec<usize>,
    nodes: usize,
}

impl Search<'_> {
    fn child_order(&self, y: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dyn_.n_controls()).collect();
        if let Some(normal) = self.target.outward_normal(y) {
            let score: Vec<f64> = order
                .iter()
                .map(|c| point::dot(&self.dyn_.eval(y, *c), &normal))
                .collect();
            order.sort_by(|a, b| score[*a].total_cmp(&score[*b]));
        }
        order
    }

    // `window` holds the last p + 1 rows, ending at y(depth * mesh)
    fn visit(&mut self, depth: usize, window: &[f64]) {
        let n = self.n;
        let t = (depth * self.cell_steps) as f64 * self.dt;
        let y = &window[window.len() - n..];
        if self.prune && t + self.target.distance(y) / self.dyn_.bound_m >= self.best {
            return;
        }
        let base = window.len() / n - 1;
        for c in self.child_order(y) {
            self.nodes += 1;
            let mut buf = window.to_vec();
            extend_constant(self.dyn_, c, &mut buf, self.p, self.cell_steps, self.dt);
            let mut hit = None;
            for s in 1..=self.cell_steps {
                if self.target.contains(&buf[(base + s) * n..(base + s + 1) * n]) {
                    let ya = &buf[(base + s - 1) * n..(base + s) * n];
                    let yb = &buf[(base + s) * n..(base + s + 1) * n];
                    let step0 = depth * self.cell_steps + s - 1;
                    let ta = step0 as f64 * self.dt;
                    let tb = (step0 + 1) as f64 * self.dt;
                    let tol = TOL_THETA_REL * tb;
                    hit = Some(bisect_entry(ta, tb, tol, |tm| {
                        self.target.contains(&point::lerp(ya, yb, (tm - ta) / self.dt))
                    }));
                    break;
                }
            }
            self.word.push(c);
            match hit {
                Some(th) => {
                    if th <= self.horizon * (1.0 + 1e-12) && th < self.best {
                        self.best = th;
                        self.best_word = self.word.clone();
                    }
                }
                None if depth + 1 < self.n_cells => {
                    let keep = (self.p + 1) * n;
                    let next = buf[buf.len() - keep..].to_vec();
                    self.visit(depth + 1, &next);
                }
                None => {}
            }
            self.word.pop();
        }
    }
}

/// Best hit over control words reaching K within the horizon, or `None`.
pub fn min_time_search(
    x0: &HistoryPath,
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    cfg: &SearchConfig,
) -> Result<Option<MinTimeResult>> {
    if x0.dim() != dyn_.dim_state() || target.dim() != dyn_.dim_state() {
        return Err(Error::Shape("history, target and dynamics dimensions differ".into()));
    }
    let (cell_steps, n_cells) = cfg.cells()?;
    if target.contains(x0.head()) {
        return Ok(Some(MinTimeResult {
            value: 0.0,
            control: ControlSignal::from_word(&[], cfg.switch_mesh)?,
            method: Method::Search,
            mesh: cfg.switch_mesh,
            nodes_explored: 0,
        }));
    }
    let p = steps_per_delay(x0.delay(), cfg.dt)?;
    let mut window = Vec::with_capacity((p + 1) * x0.dim());
    for i in 0..p {
        window.extend(x0.eval_clamped(-x0.delay() + i as f64 * cfg.dt));
    }
    window.extend_from_slice(x0.head());

    let mut search = Search {
        dyn_,
        target,
        n: x0.dim(),
        p,
        dt: cfg.dt,
        cell_steps,
        n_cells,
        horizon: cfg.horizon,
        prune: cfg.prune,
        best: f64::INFINITY,
        best_word: Vec::new(),
        word: Vec::new(),
        nodes: 0,
    };
    search.visit(0, &window);
    if !search.best.is_finite() {
        return Ok(None);
    }
    Ok(Some(MinTimeResult {
        value: search.best,
        control: ControlSignal::from_word(&search.best_word, cfg.switch_mesh)?,
        method: Method::Search,
        mesh: cfg.switch_mesh,
        nodes_explored: search.nodes,
    }))
}

fn ray_ball_time(z: &[f64], v: &[f64], center: &[f64], r: f64) -> Option<f64> {
    // smallest s >= 0 with |z + s v - c| <= r
    let w = point::sub(z, center);
    let a = point::dot(v, v);
    let b = point::dot(&w, v);
    let c = point::dot(&w, &w) - r * r;
    if c <= 0.0 {
        return Some(0.0);
    }
    if a == 0.0 || b >= 0.0 {
        return None;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // stable root of a s^2 + 2 b s + c = 0 with b < 0
    Some(c / (-b + disc.sqrt()))
}

/// Exact time along the best constant control for unit-speed dynamics.
///
/// When the inward direction at `x0(0)` is in the control list this is the
/// minimum time. Otherwise it is the straight-line time along the best
/// available direction, an upper bound.
pub fn min_time_analytic(
    x0: &HistoryPath,
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
) -> Result<MinTimeResult> {
    if !matches!(dyn_.field(), Field::UnitSpeed) {
        return Err(Error::Unsupported(format!(
            "closed-form minimum time needs unit_speed dynamics, got {}",
            dyn_.field().name()
        )));
    }
    let z = x0.head();
    if target.contains(z) {
        return Ok(MinTimeResult {
            value: 0.0,
            control: ControlSignal::constant(0),
            method: Method::Analytic,
            mesh: 0.0,
            nodes_explored: 0,
        });
    }
    let mut best: Option<(f64, usize)> = None;
    for (idx, u) in dyn_.controls().iter().enumerate() {
        for (c, r) in target.centers().iter().zip(target.radii()) {
            if let Some(s) = ray_ball_time(z, u, c, *r) {
                if best.is_none_or(|(b, _)| s < b) {
                    best = Some((s, idx));
                }
            }
        }
    }
    let (value, idx) = best.ok_or_else(|| {
        Error::Invalid("no constant control reaches the target from x(0)".into())
    })?;
    Ok(MinTimeResult {
        value,
        control: ControlSignal::constant(idx),
        method: Method::Analytic,
        mesh: 0.0,
        nodes_explored: 0,
    })
}

/// True when some control is a positive multiple of the inward normal at `z`.
pub fn has_inward_control(dyn_: &DynamicsSpec, target: &TargetSpec, z: &[f64]) -> bool {
    let Some(normal) = target.outward_normal(z) else {
        return false;
    };
    dyn_.controls().iter().any(|u| {
        let nu = point::norm(u);
        nu > 0.0 && (point::dot(u, &normal) / nu + 1.0).abs() < 1e-12
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuePolicy {
    pub search: SearchConfig,
    /// Use the closed form when it is exact.
    pub prefer_analytic: bool,
    /// Also run steering and check the search against it.
    pub steering: Option<SteeringParams>,
}

impl ValuePolicy {
    pub fn search_only(search: SearchConfig) -> Self {
        Self {
            search,
            prefer_analytic: false,
            steering: None,
        }
    }

    pub fn auto(search: SearchConfig) -> Self {
        Self {
            search,
            prefer_analytic: true,
            steering: None,
        }
    }
}

/// Dispatch per policy. When the search misses K within its horizon and a
/// steering run is configured, the steering time is returned instead.
pub fn value(
    x0: &HistoryPath,
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    policy: &ValuePolicy,
) -> Result<Option<MinTimeResult>> {
    let z = x0.head();
    if policy.prefer_analytic
        && matches!(dyn_.field(), Field::UnitSpeed)
        && (target.contains(z) || has_inward_control(dyn_, target, z))
    {
        return Ok(Some(min_time_analytic(x0, dyn_, target)?));
    }
    let found = min_time_search(x0, dyn_, target, &policy.search)?;
    let Some(params) = &policy.steering else {
        return Ok(found);
    };
    if target.contains(z) {
        return Ok(found);
    }
    let steered = steer(x0, dyn_, target, params, policy.search.dt)?;
    match found {
        Some(r) => {
            let tol = TOL_THETA_REL * steered.total_time.max(1.0) + dyn_.bound_m * policy.search.dt;
            if r.value > steered.total_time + tol {
                return Err(Error::Invalid(format!(
                    "search value {} exceeds the steering time {}",
                    fmt_num(r.value),
                    fmt_num(steered.total_time)
                )));
            }
            Ok(Some(r))
        }
        None => Ok(Some(MinTimeResult {
            value: steered.total_time,
            control: steered.control,
            method: Method::SteeringBound,
            mesh: 0.0,
            nodes_explored: 0,
        })),
    }
}

/// Columns `x0_id, value, method, mesh, nodes_explored`.
pub fn write_results<W: Write>(out: W, results: &[(String, MinTimeResult)]) -> Result<()> {
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|(id, r)| {
            vec![
                id.clone(),
                fmt_num(r.value),
                r.method.name().to_string(),
                fmt_num(r.mesh),
                r.nodes_explored.to_string(),
            ]
        })
        .collect();
    write_rows(out, &["x0_id", "value", "method", "mesh", "nodes_explored"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::planar_directions;
    use std::f64::consts::PI;

    fn line() -> (DynamicsSpec, TargetSpec) {
        (
            DynamicsSpec::unit_speed(vec![vec![-1.0], vec![1.0]]).unwrap(),
            TargetSpec::ball(vec![0.0], 1.0).unwrap(),
        )
    }

    #[test]
    fn search_on_line() {
        let (d, k) = line();
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let cfg = SearchConfig::new(0.25, 2.0, 0.5 / 256.0);
        let r = min_time_search(&x0, &d, &k, &cfg).unwrap().unwrap();
        assert!((r.value - 1.0).abs() <= 1e-8, "{}", r.value);
        assert_eq!(r.control.index_at(0.1), 0);
        let replay = r.replay(&x0, &d, &k, cfg.dt).unwrap().unwrap();
        assert!((replay - r.value).abs() <= 1e-7);
    }

    #[test]
    fn search_inside_target() {
        let (d, k) = line();
        let x0 = HistoryPath::constant(&[0.5], 0.5, 64).unwrap();
        let cfg = SearchConfig::new(0.25, 2.0, 0.5 / 256.0);
        let r = min_time_search(&x0, &d, &k, &cfg).unwrap().unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.nodes_explored, 0);
    }

    #[test]
    fn search_misses_within_horizon() {
        let (d, k) = line();
        let x0 = HistoryPath::constant(&[4.0], 0.5, 64).unwrap();
        let cfg = SearchConfig::new(0.25, 1.0, 0.5 / 256.0);
        assert!(min_time_search(&x0, &d, &k, &cfg).unwrap().is_none());
        let deep = SearchConfig::new(0.25, 4.5, 0.5 / 256.0);
        assert!(matches!(
            min_time_search(&x0, &d, &k, &deep),
            Err(Error::Budget { cells: 18, limit: 16 })
        ));
        let bad = SearchConfig::new(0.3, 1.0, 0.5 / 256.0);
        assert!(matches!(min_time_search(&x0, &d, &k, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn search_sixteen_directions() {
        let d = DynamicsSpec::unit_speed(planar_directions(16)).unwrap();
        let k = TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let x0 = HistoryPath::constant(&[2.0, 0.0], 0.5, 64).unwrap();
        let cfg = SearchConfig::new(0.25, 2.0, 0.5 / 256.0);
        let r = min_time_search(&x0, &d, &k, &cfg).unwrap().unwrap();
        assert!(r.value >= 1.0 - 1e-9 && r.value <= 1.0 / (PI / 16.0).cos() + 1e-6);
    }

    #[test]
    fn pruning_does_not_change_value() {
        let d = DynamicsSpec::unit_speed(planar_directions(6)).unwrap();
        let k = TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let x0 = HistoryPath::constant(&[1.6, 0.7], 0.5, 16).unwrap();
        let mut cfg = SearchConfig::new(0.25, 1.5, 0.5 / 16.0);
        let a = min_time_search(&x0, &d, &k, &cfg).unwrap().unwrap();
        cfg.prune = false;
        let b = min_time_search(&x0, &d, &k, &cfg).unwrap().unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.nodes_explored < b.nodes_explored);
    }

    #[test]
    fn analytic_values() {
        let d = DynamicsSpec::unit_speed(planar_directions(16)).unwrap();
        let k = TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let x0 = HistoryPath::constant(&[2.0, 0.0], 0.5, 64).unwrap();
        let r = min_time_analytic(&x0, &d, &k).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.control.index_at(0.0), 8);

        let on = HistoryPath::constant(&[1.0, 0.0], 0.5, 64).unwrap();
        assert_eq!(min_time_analytic(&on, &d, &k).unwrap().value, 0.0);

        // the best grid direction from (2, 0.1) is (-1, 0)
        let off = HistoryPath::constant(&[2.0, 0.1], 0.5, 64).unwrap();
        let r = min_time_analytic(&off, &d, &k).unwrap();
        let chord = 2.0 - (1.0f64 - 0.01).sqrt();
        assert!((r.value - chord).abs() < 1e-14);
        assert!(!has_inward_control(&d, &k, off.head()));

        let decay = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0]).unwrap();
        let k1 = TargetSpec::ball(vec![0.0], 0.5).unwrap();
        let x1 = HistoryPath::constant(&[1.0], 0.1, 8).unwrap();
        assert!(matches!(min_time_analytic(&x1, &decay, &k1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn value_dispatch() {
        let (d, k) = line();
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let cfg = SearchConfig::new(0.25, 2.0, 0.5 / 256.0);
        let a = value(&x0, &d, &k, &ValuePolicy::auto(cfg.clone())).unwrap().unwrap();
        let s = value(&x0, &d, &k, &ValuePolicy::search_only(cfg)).unwrap().unwrap();
        assert_eq!(a.method, Method::Analytic);
        assert_eq!(s.method, Method::Search);
        assert!((a.value - s.value).abs() <= 1e-8);
    }

    #[test]
    fn results_csv() {
        let r = MinTimeResult {
            value: 1.0,
            control: ControlSignal::constant(0),
            method: Method::Search,
            mesh: 0.25,
            nodes_explored: 3,
        };
        let mut buf = Vec::new();
        write_results(&mut buf, &[("a".into(), r)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x0_id,value,method,mesh,nodes_explored\na,1.00000000000e0,search,2.50000000000e-1,3\n"
        );
    }
}
