//! Dynamics, targets and sampling-based checks of the standing hypotheses.
//!
//! The control set is always a finite list; every algorithm that needs an
//! argmin over controls (Petrov selection, steering, search) iterates it.

mod target;
mod validate;

pub use target::{TargetKind, TargetSpec};
pub use validate::{
    best_inner_product, estimate_dk_semiconcavity, estimate_petrov,
    validate_h1, validate_h3, Domain,
    PetrovCertificate, ValidationReport, Witness,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point;

/// The built-in vector fields `f(z, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    /// `f(z, u) = u`.
    UnitSpeed,
    /// `f(z, u) = clamp(A z + B u)` with radial clamping to radius `M`.
    ClampedLinear { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
    /// `f(z, u) = clamp(-z + u)`, scalar.
    ScalarDecay,
}

impl Field {
    pub fn name(&self) -> &'static str {
        match self {
            Field::UnitSpeed => "unit_speed",
            Field::ClampedLinear { .. } => "clamped_linear",
            Field::ScalarDecay => "scalar_decay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec {
    field: Field,
    dim_state: usize,
    dim_control: usize,
    /// Declared bound `M` on `|f|`.
    pub bound_m: f64,
    /// Declared Lipschitz constant `L` of `f` in the state.
    pub lipschitz_l: f64,
    /// Declared second-difference constant of `f` in the state.
    pub semiconcavity_cf: f64,
    controls: Vec<Vec<f64>>,
}

impl DynamicsSpec {
    pub fn new(
        field: Field,
        dim_state: usize,
        bound_m: f64,
        lipschitz_l: f64,
        semiconcavity_cf: f64,
        controls: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if dim_state == 0 {
            return Err(Error::Invalid("state dimension must be positive".into()));
        }
        if !(bound_m > 0.0) || !(lipschitz_l >= 0.0) || !(semiconcavity_cf >= 0.0) {
            return Err(Error::Invalid(format!(
                "need M > 0, L >= 0, c_f >= 0; got M = {bound_m}, L = {lipschitz_l}, c_f = {semiconcavity_cf}"
            )));
        }
        let dim_control = match controls.first() {
            Some(u) => u.len(),
            None => return Err(Error::Invalid("control list is empty".into())),
        };
        if controls.iter().any(|u| u.len() != dim_control) {
            return Err(Error::Shape("controls have mixed dimensions".into()));
        }
        if controls.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite control entry".into()));
        }
        for (i, u) in controls.iter().enumerate() {
            if let Some(j) = controls[..i].iter().position(|w| point::dist(u, w) <= 1e-12) {
                return Err(Error::Invalid(format!("controls {j} and {i} are duplicates")));
            }
        }
        match &field {
            Field::UnitSpeed if dim_control != dim_state => {
                return Err(Error::Shape(format!(
                    "unit_speed needs controls in R^{dim_state}, got R^{dim_control}"
                )))
            }
            Field::ScalarDecay if dim_state != 1 || dim_control != 1 => {
                return Err(Error::Shape("scalar_decay is one-dimensional".into()))
            }
            Field::ClampedLinear { a, b } => {
                let a_ok = a.len() == dim_state && a.iter().all(|r| r.len() == dim_state);
                let b_ok = b.len() == dim_state && b.iter().all(|r| r.len() == dim_control);
                if !a_ok || !b_ok {
                    return Err(Error::Shape(format!(
                        "clamped_linear needs A {dim_state}x{dim_state} and B {dim_state}x{dim_control}"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self {
            field,
            dim_state,
            dim_control,
            bound_m,
            lipschitz_l,
            semiconcavity_cf,
            controls,
        })
    }

    /// `f(z, u) = u` with the given control list; `M` is the largest control norm.
    pub fn unit_speed(controls: Vec<Vec<f64>>) -> Result<Self> {
        let dim = controls.first().map(Vec::len).unwrap_or(0);
        let m = controls.iter().map(|u| point::norm(u)).fold(0.0, f64::max);
        Self::new(Field::UnitSpeed, dim, m, 0.0, 0.0, controls)
    }

    pub fn scalar_decay(bound_m: f64, controls: Vec<f64>) -> Result<Self> {
        let controls = controls.into_iter().map(|u| vec![u]).collect();
        Self::new(Field::ScalarDecay, 1, bound_m, 1.0, 0.0, controls)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    pub fn dim_control(&self) -> usize {
        self.dim_control
    }

    pub fn controls(&self) -> &[Vec<f64>] {
        &self.controls
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    /// True when `f` ignores the state, which makes the delay immaterial.
    pub fn is_state_independent(&self) -> bool {
        matches!(self.field, Field::UnitSpeed)
    }

    /// Evaluate `f(z, u)` for an arbitrary control value.
    pub fn eval_with(&self, z: &[f64], u: &[f64]) -> Vec<f64> {
        match &self.field {
            Field::UnitSpeed => u.to_vec(),
            Field::ScalarDecay => point::clamp_radial(vec![u[0] - z[0]], self.bound_m),
            Field::ClampedLinear { a, b } => {
                let v = a
                    .iter()
                    .zip(b)
                    .map(|(ar, br)| point::dot(ar, z) + point::dot(br, u))
                    .collect();
                point::clamp_radial(v, self.bound_m)
            }
        }
    }

    /// Evaluate `f(z, u_i)` for the `i`-th control of the list.
    pub fn eval(&self, z: &[f64], control: usize) -> Vec<f64> {
        self.eval_with(z, &self.controls[control])
    }
}

/// `k` unit vectors in the plane at angles `2 pi i / k`, starting at angle 0.
pub fn planar_directions(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}
