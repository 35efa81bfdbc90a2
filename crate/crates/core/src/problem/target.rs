use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Ball,
    UnionOfBalls,
}

/// A compact target made of one or more closed Euclidean balls.
///
/// Distance is `d_K(z) = max(0, min_i |z - c_i| - r_i)`. The projection of
/// an outside point goes to the nearest ball; ties go to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
    /// Empirical second-difference constant of `d_K` outside the interior.
    pub dk_semiconcavity_c: f64,
    /// Shell radius on which `dk_semiconcavity_c` was measured.
    pub dk_shell_r: f64,
}

impl TargetSpec {
    pub fn new(centers: Vec<Vec<f64>>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::Shape(format!(
                "target needs matching centers/radii, got {} and {}",
                centers.len(),
                radii.len()
            )));
        }
        let dim = centers[0].len();
        if dim == 0 || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::Shape("target centers have mixed dimensions".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Invalid(format!("target radius must be positive, got {r}")));
        }
        Ok(Self {
            centers,
            radii,
            dk_semiconcavity_c: 0.0,
            dk_shell_r: 0.0,
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(vec![center], vec![radius])
    }

    pub fn kind(&self) -> TargetKind {
        if self.centers.len() == 1 {
            TargetKind::Ball
        } else {
            TargetKind::UnionOfBalls
        }
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Index of the ball with the smallest gap, and that gap.
    pub fn nearest_ball(&self, z: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, (c, r)) in self.centers.iter().zip(&self.radii).enumerate() {
            let g = point::dist(z, c) - r;
            if g < best.1 {
                best = (i, g);
            }
        }
        best
    }

    /// Signed gap `min_i |z - c_i| - r_i`: negative inside, zero on the boundary.
    pub fn gap(&self, z: &[f64]) -> f64 {
        self.nearest_ball(z).1
    }

    pub fn distance(&self, z: &[f64]) -> f64 {
        self.gap(z).max(0.0)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        self.gap(z) <= 0.0
    }

    /// Nearest point `pi(z)` of K; identity for points of K.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let (i, g) = self.nearest_ball(z);
        if g <= 0.0 {
            return z.to_vec();
        }
        let c = &self.centers[i];
        let dir = point::sub(z, c);
        let s = self.radii[i] / point::norm(&dir);
        point::axpy(c, s, &dir)
    }

    /// Unit outward ray `(z - pi(z)) / |z - pi(z)|` for `z` outside K.
    pub fn outward_normal(&self, z: &[f64]) -> Option<Vec<f64>> {
        let p = self.project(z);
        let v = point::sub(z, &p);
        let n = point::norm(&v);
        if n > 0.0 {
            Some(v.into_iter().map(|x| x / n).collect())
        } else {
            None
        }
    }

    /// Shrink-or-grow every radius by `delta` (used by monotonicity tests).
    pub fn inflate(&self, delta: f64) -> Result<Self> {
        let radii = self.radii.iter().map(|r| r + delta).collect();
        let mut t = Self::new(self.centers.clone(), radii)?;
        t.dk_semiconcavity_c = self.dk_semiconcavity_c;
        t.dk_shell_r = self.dk_shell_r;
        Ok(t)
    }
}
