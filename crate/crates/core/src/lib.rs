//! Minimum-time toolkit for controlled delay systems `y'(t) = f(y(t - tau), u(t))`.
//!
//! The crate is organised bottom-up:
//!
//! - [`funcspace`]: history paths in C([-tau, 0]; R^n) with norms and Lipschitz classes.
//! - [`problem`]: dynamics, ball targets, and sampled checks of the standing hypotheses.
//! - [`integrator`]: method-of-steps trapezoid solver, history extraction, hitting times.
//! - [`steering`]: the inductive Petrov steering construction and its constants.
//! - [`mintime`]: branch-and-bound and closed-form oracles for the minimum time `T(x)`.
//! - [`regularity`]: empirical certification of the DPP, distance bound,
//!   Lipschitz modulus and semiconcavity of `T`.
//! - [`config`] and [`cli`]: JSON problem files and the batch front-end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod funcspace;
pub mod integrator;
pub mod mintime;
mod point;
pub mod problem;
pub mod regularity;
pub mod report;
pub mod steering;

pub use error::{Error, Result};
pub use funcspace::{HistoryPath, LipschitzClass};
pub use integrator::{integrate, ControlSignal, Trajectory};
pub use problem::{DynamicsSpec, Field, TargetSpec};
