//! Inductive Petrov steering.
//!
//! From a history `x_j` with `x_j(0)` near K, freeze the control that points
//! most inward at `x_j(0)` and run it for
//!
//! ```text
//! t_j = (mu - 2 M_bar L tau) / (4 M^2) * d_K(x_j(0))
//! ```
//!
//! then restart from the shifted history `x_{j+1} = y_{t_j}`. Each step
//! contracts the distance by at least `k`, so the total time is bounded by
//! `C d_K(x_0(0))` with `C = [(mu - 2 M_bar L tau) / (4 M^2)] / (1 - k)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::funcspace::{HistoryPath, LipschitzClass};
use crate::integrator::{integrate, ControlSignal};
use crate::problem::{DynamicsSpec, TargetSpec};
use crate::report::{fmt_num, write_rows};

/// Slack on the Petrov inequality when selecting a control at an arbitrary
/// point; `mu` itself is only certified on a finite shell grid.
pub const PETROV_TOL: f64 = 1e-6;

/// Absolute slack on logged contraction ratios.
pub const DEFAULT_TOL_RATIO: f64 = 0.05;

/// Termination distance relative to the initial distance.
pub const DEFAULT_EPS_REL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringParams {
    pub mu: f64,
    pub sigma: f64,
    /// Bound on `|f|`, raised to at least `mu`.
    pub m: f64,
    pub m_bar: f64,
    pub l: f64,
    pub tau: f64,
    pub delta: f64,
    pub k_contraction: f64,
    pub c_bound: f64,
    /// `(mu - 2 M_bar L tau) / (4 M^2)`.
    pub step_coef: f64,
    /// Absolute termination distance; `None` means `eps_rel * d_K(x_0(0))`.
    pub eps_target: Option<f64>,
    pub eps_rel: f64,
    pub tol_ratio: f64,
    /// Relative slack on the time budget `C d_K(x_0(0))`.
    pub tol_steer_rel: f64,
    pub max_iters: usize,
}

/// Compute the steering constants, rejecting delays at or above `mu / (2 M_bar L)`.
pub fn derive_constants(
    mu: f64,
    sigma: f64,
    m: f64,
    m_bar: f64,
    l: f64,
    tau: f64,
) -> Result<SteeringParams> {
    if !(mu > 0.0 && sigma > 0.0 && m > 0.0 && tau > 0.0 && l >= 0.0) {
        return Err(Error::Invalid(format!(
            "need mu, sigma, M, tau > 0 and L >= 0; got mu={mu}, sigma={sigma}, M={m}, tau={tau}, L={l}"
        )));
    }
    if m_bar < m {
        return Err(Error::Invalid(format!("need M_bar >= M, got M_bar={m_bar} < M={m}")));
    }
    let m = m.max(mu);
    let m_bar = m_bar.max(m);
    if l > 0.0 {
        let threshold = mu / (2.0 * m_bar * l);
        if tau >= threshold {
            return Err(Error::DelayTooLarge { tau, threshold, rule: "mu/(2*M_bar*L)" });
        }
    }
    let step_coef = (mu - 2.0 * m_bar * l * tau) / (4.0 * m * m);
    let k_contraction = (1.0 - mu * step_coef).sqrt();
    let c_bound = step_coef / (1.0 - k_contraction);
    let delta = if l > 0.0 { (m / l).min(sigma) } else { sigma };
    Ok(SteeringParams {
        mu,
        sigma,
        m,
        m_bar,
        l,
        tau,
        delta,
        k_contraction,
        c_bound,
        step_coef,
        eps_target: None,
        eps_rel: DEFAULT_EPS_REL,
        tol_ratio: DEFAULT_TOL_RATIO,
        tol_steer_rel: 0.01,
        max_iters: 10_000,
    })
}

impl SteeringParams {
    /// `mu / (2 M_bar L)`, the largest delay the distance estimate allows.
    pub fn lipschitz_tau_threshold(&self) -> f64 {
        if self.l > 0.0 {
            self.mu / (2.0 * self.m_bar * self.l)
        } else {
            f64::INFINITY
        }
    }

    /// `mu / (6 M L)`, the delay bound under which semiconcavity holds.
    pub fn semiconcavity_tau_threshold(&self) -> f64 {
        if self.l > 0.0 {
            self.mu / (6.0 * self.m * self.l)
        } else {
            f64::INFINITY
        }
    }

    pub fn step_time(&self, distance: f64) -> f64 {
        self.step_coef * distance
    }
}

/// Control index minimising `f(z,u) . (z - pi(z)) / |z - pi(z)|`, lowest
/// index on ties. Errors when even the best value is above `-mu`.
pub fn select_petrov_control(
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    z: &[f64],
    mu: f64,
) -> Result<usize> {
    if target.distance(z) <= 0.0 {
        return Err(Error::Invalid("Petrov selection needs a point outside K".into()));
    }
    let (idx, value) = crate::problem::best_inner_product(dyn_, target, z);
    if value > -mu + PETROV_TOL {
        return Err(Error::PetrovViolation {
            point: z.to_vec(),
            value,
            neg_mu: -mu,
        });
    }
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringStep {
    pub j: usize,
    pub distance: f64,
    pub step_time: f64,
    pub control: usize,
    pub next_distance: f64,
    pub ratio: f64,
    pub cumulative_time: f64,
    /// Lipschitz constant of the history the step started from.
    pub lip_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SteeringLog {
    pub steps: Vec<SteeringStep>,
}

impl SteeringLog {
    pub fn total_time(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative_time)
    }

    pub fn max_ratio(&self) -> f64 {
        self.steps.iter().map(|s| s.ratio).fold(0.0, f64::max)
    }

    /// Columns `j, d_j, t_j, control_index, ratio, cumulative_time`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .steps
            .iter()
            .map(|s| {
                vec![
                    s.j.to_string(),
                    fmt_num(s.distance),
                    fmt_num(s.step_time),
                    s.control.to_string(),
                    fmt_num(s.ratio),
                    fmt_num(s.cumulative_time),
                ]
            })
            .collect();
        write_rows(
            out,
            &["j", "d_j", "t_j", "control_index", "ratio", "cumulative_time"],
            &rows,
        )
    }
}

#[derive(Debug, Clone)]
pub struct SteeringOutcome {
    pub control: ControlSignal,
    pub total_time: f64,
    pub log: SteeringLog,
    /// Distance at termination.
    pub final_distance: f64,
}

/// Run the steering construction from `x0` with integration step `dt`.
pub fn steer(
    x0: &HistoryPath,
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    params: &SteeringParams,
    dt: f64,
) -> Result<SteeringOutcome> {
    if (x0.delay() - params.tau).abs() > 1e-12 * params.tau {
        return Err(Error::Invalid(format!(
            "history delay {} differs from parameter tau {}",
            x0.delay(),
            params.tau
        )));
    }
    let class = LipschitzClass::new(params.m_bar);
    if !class.contains(x0) {
        return Err(Error::Invalid(format!(
            "initial history has Lipschitz constant {} > M_bar = {}",
            x0.lip_constant(),
            params.m_bar
        )));
    }
    let d0 = target.distance(x0.head());
    if d0 >= params.delta {
        return Err(Error::Invalid(format!(
            "d_K(x(0)) = {d0} is not below delta = {}",
            params.delta
        )));
    }
    let eps = params.eps_target.unwrap_or(params.eps_rel * d0);
    if !(d0 > eps) {
        return Err(Error::Invalid(format!(
            "nothing to steer: d_K(x(0)) = {d0} <= eps_target = {eps}"
        )));
    }

    let ratio_cap = params.k_contraction + params.tol_ratio;
    let mut log = SteeringLog::default();
    let mut segments: Vec<(f64, usize)> = Vec::new();
    let mut x = x0.clone();
    let mut d = d0;
    let mut elapsed = 0.0;
    let mut bad_run = 0;
    for j in 0..params.max_iters {
        if d <= eps {
            break;
        }
        let c = select_petrov_control(dyn_, target, x.head(), params.mu)?;
        let traj = integrate(&x, &ControlSignal::constant(c), dyn_, params.step_time(d), dt)?;
        let t_j = traj.t_end();
        let next = traj.history_at(t_j)?;
        let d_next = target.distance(next.head());
        let ratio = d_next / d;
        segments.push((elapsed, c));
        elapsed += t_j;
        log.steps.push(SteeringStep {
            j,
            distance: d,
            step_time: t_j,
            control: c,
            next_distance: d_next,
            ratio,
            cumulative_time: elapsed,
            lip_constant: x.lip_constant(),
        });
        bad_run = if ratio > ratio_cap { bad_run + 1 } else { 0 };
        if bad_run >= 3 {
            return Err(Error::SteeringFailure {
                reason: format!(
                    "contraction ratio above k + tol = {} for 3 consecutive steps",
                    fmt_num(ratio_cap)
                ),
                log,
            });
        }
        x = next;
        d = d_next;
    }
    if d > eps {
        return Err(Error::SteeringFailure {
            reason: format!("max_iters = {} exhausted at distance {}", params.max_iters, fmt_num(d)),
            log,
        });
    }
    let budget = params.c_bound * d0;
    if elapsed > budget * (1.0 + params.tol_steer_rel) {
        return Err(Error::SteeringFailure {
            reason: format!(
                "total time {} exceeds C d_K(x(0)) = {}",
                fmt_num(elapsed),
                fmt_num(budget)
            ),
            log,
        });
    }
    if log.max_ratio() > ratio_cap {
        return Err(Error::SteeringFailure {
            reason: format!(
                "logged ratio {} above k + tol = {}",
                fmt_num(log.max_ratio()),
                fmt_num(ratio_cap)
            ),
            log,
        });
    }
    let control = ControlSignal::from_segments(&segments)?;
    Ok(SteeringOutcome {
        control,
        total_time: elapsed,
        log,
        final_distance: d,
    })
}
