//! History paths: sampled elements of C([-tau, 0]; R^n).
//!
//! A [`HistoryPath`] stores `N + 1` points on the uniform grid
//! `s_i = -tau + i * tau / N` and is extended to the whole interval by
//! linear interpolation, so it is always a continuous function and its
//! Lipschitz constant is exactly the largest adjacent-sample slope.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::point;
use crate::report::{fmt_num, write_rows};

/// Default number of grid intervals per delay window.
pub const DEFAULT_INTERVALS: usize = 64;

/// Relative tolerance for Lipschitz-class membership tests.
pub const TOL_LIP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryPath {
    dim: usize,
    delay: f64,
    intervals: usize,
    // row-major, (intervals + 1) x dim
    data: Vec<f64>,
}

impl HistoryPath {
    /// Build from a flat row-major buffer of `(intervals + 1) * dim` values.
    pub fn from_flat(dim: usize, delay: f64, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("history dimension must be positive".into()));
        }
        if !(delay > 0.0 && delay.is_finite()) {
            return Err(Error::Invalid(format!("delay must be positive, got {delay}")));
        }
        if !data.len().is_multiple_of(dim) || data.len() / dim < 2 {
            return Err(Error::Shape(format!(
                "need at least 2 samples of dimension {dim}, got {} values",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite history sample {v}")));
        }
        let intervals = data.len() / dim - 1;
        Ok(Self {
            dim,
            delay,
            intervals,
            data,
        })
    }

    pub fn new(delay: f64, samples: &[Vec<f64>]) -> Result<Self> {
        let dim = samples.first().map(Vec::len).unwrap_or(0);
        if samples.iter().any(|p| p.len() != dim) {
            return Err(Error::Shape("history samples have mixed dimensions".into()));
        }
        Self::from_flat(dim, delay, samples.concat())
    }

    pub fn constant(value: &[f64], delay: f64, intervals: usize) -> Result<Self> {
        let data = value.repeat(intervals + 1);
        Self::from_flat(value.len(), delay, data)
    }

    /// Sample `f(s)` on the grid.
    pub fn from_fn<F>(dim: usize, delay: f64, intervals: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let mut data = Vec::with_capacity((intervals + 1) * dim);
        for i in 0..=intervals {
            let s = -delay + delay * i as f64 / intervals as f64;
            let p = f(s);
            if p.len() != dim {
                return Err(Error::Shape(format!(
                    "generator returned {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            data.extend(p);
        }
        Self::from_flat(dim, delay, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// Number of grid intervals `N` (there are `N + 1` samples).
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> f64 {
        self.delay / self.intervals as f64
    }

    pub fn grid_time(&self, i: usize) -> f64 {
        if i == self.intervals {
            0.0
        } else {
            -self.delay + self.delay * i as f64 / self.intervals as f64
        }
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// The current point `x(0)`.
    pub fn head(&self) -> &[f64] {
        self.sample(self.intervals)
    }

    /// Evaluate at `s in [-tau, 0]` by linear interpolation.
    pub fn eval(&self, s: f64) -> Result<Vec<f64>> {
        let slack = 1e-12 * self.delay;
        if !(s >= -self.delay - slack && s <= slack) {
            return Err(Error::Domain {
                t: s,
                lo: -self.delay,
                hi: 0.0,
            });
        }
        Ok(self.eval_clamped(s))
    }

    pub(crate) fn eval_clamped(&self, s: f64) -> Vec<f64> {
        let pos = ((s + self.delay) / self.spacing()).clamp(0.0, self.intervals as f64);
        let i = (pos.floor() as usize).min(self.intervals - 1);
        let w = pos - i as f64;
        if w == 0.0 {
            return self.sample(i).to_vec();
        }
        if w == 1.0 {
            return self.sample(i + 1).to_vec();
        }
        point::lerp(self.sample(i), self.sample(i + 1), w)
    }

    /// Uniform norm; exact for piecewise-linear paths because the maximum of
    /// a convex function on a segment sits at an endpoint.
    pub fn sup_norm(&self) -> f64 {
        self.samples().map(point::norm).fold(0.0, f64::max)
    }

    /// Largest adjacent-sample slope `|x(s_{i+1}) - x(s_i)| * N / tau`.
    pub fn lip_constant(&self) -> f64 {
        let inv_h = 1.0 / self.spacing();
        self.data
            .chunks_exact(self.dim)
            .zip(self.data.chunks_exact(self.dim).skip(1))
            .map(|(a, b)| point::dist(a, b) * inv_h)
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim
            || self.intervals != other.intervals
            || (self.delay - other.delay).abs() > 1e-12 * self.delay
        {
            return Err(Error::Shape(format!(
                "incompatible histories: (n={}, tau={}, N={}) vs (n={}, tau={}, N={})",
                self.dim, self.delay, self.intervals, other.dim, other.delay, other.intervals
            )));
        }
        Ok(())
    }

    /// Samplewise `self + a * h`.
    pub fn combine(&self, h: &Self, a: f64) -> Result<Self> {
        self.check_compatible(h)?;
        let data = point::axpy(&self.data, a, &h.data);
        Self::from_flat(self.dim, self.delay, data)
    }

    /// Samplewise `self - other`.
    pub fn diff(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Resample onto a grid with `intervals` intervals.
    pub fn resample(&self, intervals: usize) -> Result<Self> {
        if intervals == self.intervals {
            return Ok(self.clone());
        }
        if intervals == 0 {
            return Err(Error::Invalid("resampling needs at least one interval".into()));
        }
        Self::from_fn(self.dim, self.delay, intervals, |s| self.eval_clamped(s))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["s".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x_{k}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = (0..=self.intervals)
            .map(|i| {
                std::iter::once(fmt_num(self.grid_time(i)))
                    .chain(self.sample(i).iter().map(|v| fmt_num(*v)))
                    .collect()
            })
            .collect();
        write_rows(out, &header_refs, &rows)
    }

    /// Parse a CSV block written by [`HistoryPath::write_csv`]. The grid must
    /// be uniform and end at `s = 0`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut times = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Invalid(format!("bad number {c:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() < 2 {
                return Err(Error::Shape("history CSV needs s and at least one coordinate".into()));
            }
            match dim {
                None => dim = Some(vals.len() - 1),
                Some(d) if d != vals.len() - 1 => {
                    return Err(Error::Shape("ragged history CSV".into()))
                }
                _ => {}
            }
            times.push(vals[0]);
            data.extend_from_slice(&vals[1..]);
        }
        let dim = dim.ok_or_else(|| Error::Shape("empty history CSV".into()))?;
        let delay = -times[0];
        let path = Self::from_flat(dim, delay, data)?;
        for (i, s) in times.iter().enumerate() {
            if (s - path.grid_time(i)).abs() > 1e-9 * delay {
                return Err(Error::Invalid(format!(
                    "history CSV row {i} has s = {s}, expected uniform grid value {}",
                    path.grid_time(i)
                )));
            }
        }
        Ok(path)
    }
}

/// The class Lip_{M_bar} of histories with Lipschitz constant at most `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzClass {
    pub bound: f64,
}

impl LipschitzClass {
    pub fn new(bound: f64) -> Self {
        Self { bound }
    }

    pub fn contains(&self, x: &HistoryPath) -> bool {
        x.lip_constant() <= self.bound * (1.0 + TOL_LIP) + TOL_LIP
    }
}
