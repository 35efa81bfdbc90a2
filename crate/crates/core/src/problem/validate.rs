//! Sampling-based validation of the hypotheses on `f` and K.
//!
//! None of these prove anything; they measure the constants on a finite
//! grid and report explicit witnesses when a declared constant is violated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DynamicsSpec, TargetSpec};
use crate::error::{Error, Result};
use crate::point;
use crate::report::fmt_num;

/// Relative slack granted to declared constants.
const DECLARED_SLACK: f64 = 0.01;
/// Floor below which second-difference ratios are treated as round-off.
const RATIO_FLOOR: f64 = 1e-6;

/// Axis-aligned working box.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Shape("domain bounds have mismatched lengths".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Invalid("domain needs lower < upper on every axis".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| *x >= *l && *x <= *u)
    }

    /// Tensor grid with `per_axis` points per axis, corners included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut flat| {
                (0..n)
                    .map(|k| {
                        let i = flat % per_axis;
                        flat /= per_axis;
                        let w = i as f64 / (per_axis - 1) as f64;
                        self.lower[k] + w * (self.upper[k] - self.lower[k])
                    })
                    .collect()
            })
            .collect()
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rng.gen_range(*l..=*u))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    pub control: Option<usize>,
    pub value: f64,
}

/// Outcome of a hypothesis check: verdict, measured constants, witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub check: String,
    pub passed: bool,
    pub measured: Vec<(String, f64)>,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "[{}] {}\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.check
        );
        for (k, v) in &self.measured {
            s.push_str(&format!("  {k} = {}\n", fmt_num(*v)));
        }
        if let Some(w) = &self.witness {
            let pts: Vec<String> = w
                .points
                .iter()
                .map(|p| {
                    let c: Vec<String> = p.iter().map(|v| fmt_num(*v)).collect();
                    format!("({})", c.join(", "))
                })
                .collect();
            s.push_str(&format!(
                "  witness: {} control={} value={}\n",
                pts.join(" "),
                w.control.map_or("-".to_string(), |c| c.to_string()),
                fmt_num(w.value)
            ));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}

fn within_declared(measured: f64, declared: f64) -> bool {
    measured <= declared * (1.0 + DECLARED_SLACK) + 1e-12
}

/// Check `|f| <= M` and `|f(z,u) - f(y,u)| <= L |z - y|` on a sample grid.
///
/// Samples a tensor grid with `n_samples` points per axis. Slopes are taken
/// over grid neighbours plus, for every grid point, one random partner in
/// the box drawn from a generator seeded with `seed`.
pub fn validate_h1(
    dyn_: &DynamicsSpec,
    domain: &Domain,
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if n_samples < 2 {
        return Err(Error::Invalid("validate_h1 needs n_samples >= 2".into()));
    }
    if domain.dim() != dyn_.dim_state() {
        return Err(Error::Shape("domain dimension differs from state dimension".into()));
    }
    let grid = domain.grid(n_samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut max_f = (0.0, Witness { points: vec![], control: None, value: 0.0 });
    for z in &grid {
        for u in 0..dyn_.n_controls() {
            let v = point::norm(&dyn_.eval(z, u));
            if v > max_f.0 {
                max_f = (v, Witness { points: vec![z.clone()], control: Some(u), value: v });
            }
        }
    }

    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let n = domain.dim();
    let stride: Vec<usize> = (0..n).map(|k| n_samples.pow(k as u32)).collect();
    for (flat, z) in grid.iter().enumerate() {
        for s in &stride {
            if (flat / s) % n_samples + 1 < n_samples {
                pairs.push((z.clone(), grid[flat + s].clone()));
            }
        }
        pairs.push((z.clone(), domain.random_point(&mut rng)));
    }

    let mut max_slope = (0.0, None);
    for (z, y) in &pairs {
        let d = point::dist(z, y);
        if d < 1e-12 {
            continue;
        }
        for u in 0..dyn_.n_controls() {
            let slope = point::dist(&dyn_.eval(z, u), &dyn_.eval(y, u)) / d;
            if slope > max_slope.0 {
                max_slope = (
                    slope,
                    Some(Witness { points: vec![z.clone(), y.clone()], control: Some(u), value: slope }),
                );
            }
        }
    }

    let bound_ok = within_declared(max_f.0, dyn_.bound_m);
    let lip_ok = within_declared(max_slope.0, dyn_.lipschitz_l);
    let mut notes = Vec::new();
    let witness = if !bound_ok {
        notes.push(format!("|f| exceeds declared M = {}", fmt_num(dyn_.bound_m)));
        Some(max_f.1)
    } else if !lip_ok {
        notes.push(format!("slope exceeds declared L = {}", fmt_num(dyn_.lipschitz_l)));
        max_slope.1
    } else {
        None
    };
    Ok(ValidationReport {
        check: "H1 (bound and Lipschitz)".into(),
        passed: bound_ok && lip_ok,
        measured: vec![
            ("max_abs_f".into(), max_f.0),
            ("max_slope".into(), max_slope.0),
            ("declared_M".into(), dyn_.bound_m),
            ("declared_L".into(), dyn_.lipschitz_l),
        ],
        witness,
        notes,
    })
}

/// Directional stability of a sequence of ratios ordered from coarse to fine
/// scale: no ratio may exceed twice its coarser neighbour plus `floor`.
pub(crate) fn ratios_non_exploding(ratios: &[f64], floor: f64) -> bool {
    ratios
        .windows(2)
        .all(|w| w[1].max(0.0) <= 2.0 * w[0].max(0.0) + floor)
}

/// Measure `|f(z+h,u) + f(z-h,u) - 2 f(z,u)| / |h|^2` across `h_scales`.
///
/// Perturbations run along each coordinate axis at every grid point whose
/// `z +- h` stays in the domain. Passes when the worst ratio is within the
/// declared `c_f` and the per-scale maxima do not blow up as `h` shrinks.
pub fn validate_h3(
    dyn_: &DynamicsSpec,
    domain: &Domain,
    n_samples: usize,
    h_scales: &[f64],
) -> Result<ValidationReport> {
    if n_samples < 2 {
        return Err(Error::Invalid("validate_h3 needs n_samples >= 2".into()));
    }
    if h_scales.is_empty()
        || h_scales.iter().any(|h| !(*h > 0.0))
        || h_scales.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::Invalid("h_scales must be positive and decreasing".into()));
    }
    if domain.dim() != dyn_.dim_state() {
        return Err(Error::Shape("domain dimension differs from state dimension".into()));
    }
    let n = dyn_.dim_state();
    let grid = domain.grid(n_samples);
    let mut per_scale = vec![0.0f64; h_scales.len()];
    let mut worst: Option<Witness> = None;
    let mut worst_val = 0.0;
    for (si, &h) in h_scales.iter().enumerate() {
        for z in &grid {
            for axis in 0..n {
                let mut e = vec![0.0; n];
                e[axis] = h;
                let zp = point::axpy(z, 1.0, &e);
                let zm = point::axpy(z, -1.0, &e);
                if !domain.contains(&zp) || !domain.contains(&zm) {
                    continue;
                }
                for u in 0..dyn_.n_controls() {
                    let fz = dyn_.eval(z, u);
                    let fp = dyn_.eval(&zp, u);
                    let fm = dyn_.eval(&zm, u);
                    let second: Vec<f64> = (0..n).map(|k| fp[k] + fm[k] - 2.0 * fz[k]).collect();
                    let ratio = point::norm(&second) / (h * h);
                    if ratio > per_scale[si] {
                        per_scale[si] = ratio;
                    }
                    if ratio > worst_val {
                        worst_val = ratio;
                        worst = Some(Witness { points: vec![z.clone(), e.clone()], control: Some(u), value: ratio });
                    }
                }
            }
        }
    }
    let max_ratio = per_scale.iter().cloned().fold(0.0, f64::max);
    let stable = ratios_non_exploding(&per_scale, RATIO_FLOOR);
    let bound_ok = max_ratio <= dyn_.semiconcavity_cf * (1.0 + DECLARED_SLACK) + RATIO_FLOOR;
    let mut notes = Vec::new();
    if !stable {
        notes.push("second-difference ratio grows as h shrinks: f is not semiconcave here".into());
    }
    if !bound_ok {
        notes.push(format!(
            "ratio exceeds declared c_f = {}",
            fmt_num(dyn_.semiconcavity_cf)
        ));
    }
    let mut measured = vec![("max_ratio".to_string(), max_ratio)];
    for (h, r) in h_scales.iter().zip(&per_scale) {
        measured.push((format!("ratio_at_h={}", fmt_num(*h)), *r));
    }
    measured.push(("declared_cf".into(), dyn_.semiconcavity_cf));
    let passed = stable && bound_ok;
    Ok(ValidationReport {
        check: "H3 (semiconcavity of f in the state)".into(),
        passed,
        measured,
        witness: if passed { None } else { worst },
        notes,
    })
}

/// Certified Petrov margin on a finite shell grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PetrovCertificate {
    pub mu: f64,
    pub sigma: f64,
    pub shell_samples: usize,
    pub worst_point: Vec<f64>,
    /// The sampled shell points, kept for replay.
    pub samples: Vec<Vec<f64>>,
}

impl PetrovCertificate {
    /// Largest `min_u f(z,u) . n(z) + mu` over the stored samples; a valid
    /// certificate replays to a value `<= 0`.
    pub fn replay(&self, dyn_: &DynamicsSpec, target: &TargetSpec) -> f64 {
        self.samples
            .iter()
            .map(|z| best_inner_product(dyn_, target, z).1 + self.mu)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `(argmin, min)` over the control list of `f(z,u) . (z - pi(z)) / |z - pi(z)|`.
/// Ties resolve to the lowest index. `z` must lie outside K.
pub fn best_inner_product(
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    z: &[f64],
) -> (usize, f64) {
    let normal = match target.outward_normal(z) {
        Some(n) => n,
        None => return (0, f64::NAN),
    };
    let mut best = (0, f64::INFINITY);
    for u in 0..dyn_.n_controls() {
        let v = point::dot(&dyn_.eval(z, u), &normal);
        if v < best.1 {
            best = (u, v);
        }
    }
    best
}

/// Unit directions for shell sampling in R^1, R^2 and R^3.
fn shell_directions(dim: usize, grid: usize) -> Result<Vec<Vec<f64>>> {
    use std::f64::consts::PI;
    match dim {
        1 => Ok(vec![vec![-1.0], vec![1.0]]),
        2 => Ok((0..grid)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / grid as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()),
        3 => {
            let mut dirs = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
            let bands = (grid / 2).max(1);
            for b in 0..bands {
                let polar = PI * (b as f64 + 0.5) / bands as f64;
                for k in 0..grid {
                    let az = 2.0 * PI * k as f64 / grid as f64;
                    dirs.push(vec![polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()]);
                }
            }
            Ok(dirs)
        }
        _ => Err(Error::Unsupported(format!(
            "shell sampling is implemented for n <= 3, got n = {dim}"
        ))),
    }
}

/// Estimate the Petrov margin `mu` on the shell `K_sigma \ K`.
///
/// Each ball contributes a radial x angular grid: `shell_grid` distance
/// levels (the first one a hair outside the boundary) times the angular
/// directions. Samples swallowed by another ball or farther than `sigma`
/// from K are dropped. Fails with the worst sample when `mu <= 0`.
pub fn estimate_petrov(
    dyn_: &DynamicsSpec,
    target: &TargetSpec,
    sigma: f64,
    shell_grid: usize,
) -> Result<PetrovCertificate> {
    if !(sigma > 0.0) {
        return Err(Error::Invalid(format!("sigma must be positive, got {sigma}")));
    }
    if shell_grid == 0 {
        return Err(Error::Invalid("shell_grid must be positive".into()));
    }
    if target.dim() != dyn_.dim_state() {
        return Err(Error::Shape("target and state dimensions differ".into()));
    }
    let dirs = shell_directions(target.dim(), shell_grid)?;
    let levels: Vec<f64> = (0..shell_grid)
        .map(|k| if k == 0 { 1e-9 * sigma } else { sigma * k as f64 / shell_grid as f64 })
        .collect();
    let mut samples = Vec::new();
    for (c, r) in target.centers().iter().zip(target.radii()) {
        for d in &levels {
            for e in &dirs {
                let z = point::axpy(c, r + d, e);
                let dk = target.gap(&z);
                if dk > 0.0 && dk < sigma {
                    samples.push(z);
                }
            }
        }
    }
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    for z in &samples {
        let (_, v) = best_inner_product(dyn_, target, z);
        if v > worst.0 {
            worst = (v, z.clone());
        }
    }
    if samples.is_empty() {
        return Err(Error::Invalid("Petrov shell grid produced no samples".into()));
    }
    let mu = -worst.0;
    if mu <= 0.0 {
        return Err(Error::PetrovViolation {
            point: worst.1,
            value: worst.0,
            neg_mu: 0.0,
        });
    }
    Ok(PetrovCertificate {
        mu,
        sigma,
        shell_samples: samples.len(),
        worst_point: worst.1,
        samples,
    })
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = point::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Empirical constant `c` with
/// `d_K(z1) + d_K(z2) - 2 d_K((z1+z2)/2) <= c |z1 - z2|^2`
/// over random pairs in `K_{shell_r}` minus the interior of K.
///
/// `z1` is drawn in the shell around a random ball; `z2 = z1 + h e` for a
/// random unit `e` and each `h` in `h_scales`. Pairs closer than 1e-6, or
/// whose partner or midpoint leave the shell, are skipped.
pub fn estimate_dk_semiconcavity(
    target: &TargetSpec,
    shell_r: f64,
    n_samples: usize,
    h_scales: &[f64],
    seed: u64,
) -> Result<f64> {
    if !(shell_r > 0.0) {
        return Err(Error::Invalid(format!("shell_r must be positive, got {shell_r}")));
    }
    let dim = target.dim();
    let in_shell = |z: &[f64]| {
        let g = target.gap(z);
        g >= 0.0 && g < shell_r
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = 0.0f64;
    for _ in 0..n_samples {
        let ball = rng.gen_range(0..target.centers().len());
        let e = random_unit(dim, &mut rng);
        let off = rng.gen_range(0.0..shell_r);
        let z1 = point::axpy(&target.centers()[ball], target.radii()[ball] + off, &e);
        if !in_shell(&z1) {
            continue;
        }
        let dir = random_unit(dim, &mut rng);
        for &h in h_scales {
            let z2 = point::axpy(&z1, h, &dir);
            let mid = point::lerp(&z1, &z2, 0.5);
            let sep = point::dist(&z1, &z2);
            if sep < 1e-6 || !in_shell(&z2) || !in_shell(&mid) {
                continue;
            }
            let second = target.distance(&z1) + target.distance(&z2) - 2.0 * target.distance(&mid);
            c = c.max(second / (sep * sep));
        }
    }
    Ok(c)
}

impl TargetSpec {
    /// Measure the `d_K` semiconcavity constant and store it on the target.
    pub fn calibrate_dk(
        &mut self,
        shell_r: f64,
        n_samples: usize,
        h_scales: &[f64],
        seed: u64,
    ) -> Result<f64> {
        let c = estimate_dk_semiconcavity(self, shell_r, n_samples, h_scales, seed)?;
        self.dk_semiconcavity_c = c;
        self.dk_shell_r = shell_r;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::planar_directions;
    use std::f64::consts::PI;

    fn decay() -> DynamicsSpec {
        DynamicsSpec::scalar_decay(2.0, vec![-0.5, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn h1_unit_speed_passes_with_zero_slope() {
        let d = DynamicsSpec::unit_speed(planar_directions(16)).unwrap();
        let dom = Domain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let r = validate_h1(&d, &dom, 5, 7).unwrap();
        assert!(r.passed);
        assert!((r.measured("max_abs_f").unwrap() - 1.0).abs() < 1e-12);
        assert!(r.measured("max_slope").unwrap() < 1e-12);
    }

    #[test]
    fn h1_scalar_decay_slope_is_at_most_one() {
        let dom = Domain::new(vec![-1.5], vec![1.5]).unwrap();
        let r = validate_h1(&decay(), &dom, 301, 1).unwrap();
        assert!(r.passed, "{}", r.to_text());
        let slope = r.measured("max_slope").unwrap();
        assert!(slope <= 1.0 + 1e-12 && slope > 0.99);
    }

    #[test]
    fn h1_flags_understated_lipschitz_constant() {
        let mut d = decay();
        d.lipschitz_l = 0.5;
        let dom = Domain::new(vec![-1.5], vec![1.5]).unwrap();
        let r = validate_h1(&d, &dom, 51, 1).unwrap();
        assert!(!r.passed);
        let w = r.witness.expect("witness pair");
        assert_eq!(w.points.len(), 2);
        assert!(w.value > 0.505);
    }

    #[test]
    fn h3_vanishes_for_affine_fields() {
        let d = DynamicsSpec::unit_speed(planar_directions(8)).unwrap();
        let dom = Domain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = validate_h3(&d, &dom, 5, &[0.1, 0.05, 0.025]).unwrap();
        assert!(r.passed);
        assert_eq!(r.measured("max_ratio").unwrap(), 0.0);

        let lin = DynamicsSpec::new(
            crate::problem::Field::ClampedLinear {
                a: vec![vec![-0.5, 0.2], vec![0.1, -0.3]],
                b: vec![vec![1.0], vec![0.5]],
            },
            2,
            10.0,
            1.0,
            0.0,
            vec![vec![-1.0], vec![1.0]],
        )
        .unwrap();
        let r = validate_h3(&lin, &dom, 7, &[0.1, 0.05, 0.025]).unwrap();
        assert!(r.passed, "{}", r.to_text());
        assert!(r.measured("max_ratio").unwrap() < RATIO_FLOOR);
    }

    #[test]
    fn h3_reports_clamp_kink() {
        // f(z, 1) = clamp(1 - z, 2) bends at z = -1: second difference there is h,
        // so the ratio is 1/h.
        let d = DynamicsSpec::scalar_decay(2.0, vec![1.0]).unwrap();
        let dom = Domain::new(vec![-2.0], vec![0.0]).unwrap();
        let r = validate_h3(&d, &dom, 21, &[0.1, 0.05]).unwrap();
        let at_01 = r.measured("ratio_at_h=1.00000000000e-1").unwrap();
        assert!((at_01 - 10.0).abs() < 1e-9, "{at_01}");
        assert!(r.measured("max_ratio").unwrap().is_finite());
        assert!(!r.passed);
    }

    #[test]
    fn h3_rejects_bad_scales() {
        let dom = Domain::new(vec![-1.0], vec![1.0]).unwrap();
        assert!(validate_h3(&decay(), &dom, 5, &[0.01, 0.1]).is_err());
        assert!(validate_h3(&decay(), &dom, 5, &[]).is_err());
    }

    #[test]
    fn petrov_sixteen_directions() {
        // worst misalignment between inward normal and nearest of 16 directions is pi/16
        let d = DynamicsSpec::unit_speed(planar_directions(16)).unwrap();
        let k = TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cert = estimate_petrov(&d, &k, 1.0, 64).unwrap();
        let brute = planar_directions(16)
            .iter()
            .map(|u| u[0] * (PI / 16.0).cos() + u[1] * (PI / 16.0).sin())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((cert.mu - brute).abs() < 1e-12);
        assert!((cert.mu - (PI / 16.0).cos()).abs() < 1e-12);
        assert!(cert.replay(&d, &k) <= 1e-12);
    }

    #[test]
    fn petrov_one_dimensional() {
        let d = DynamicsSpec::unit_speed(vec![vec![-1.0], vec![1.0]]).unwrap();
        let k = TargetSpec::ball(vec![0.0], 1.0).unwrap();
        let cert = estimate_petrov(&d, &k, 1.0, 16).unwrap();
        assert_eq!(cert.mu, 1.0);

        let one_sided = DynamicsSpec::unit_speed(vec![vec![1.0]]).unwrap();
        match estimate_petrov(&one_sided, &k, 1.0, 16) {
            Err(Error::PetrovViolation { point, value, .. }) => {
                assert!(point[0] > 1.0);
                assert_eq!(value, 1.0);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn dk_constant_for_unit_disc() {
        let k = TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        // pair at radius 2: closed-form second difference of |z| - 1
        let eps: f64 = 1e-3;
        let (z1, z2) = ([2.0, 0.0], [2.0, eps]);
        let mid = [2.0, eps / 2.0];
        let second = k.distance(&z1) + k.distance(&z2) - 2.0 * k.distance(&mid);
        let closed = (4.0 + eps * eps).sqrt() - 2.0 * (4.0 + eps * eps / 4.0).sqrt() + 2.0;
        assert!((second - closed).abs() < 1e-12);
        assert!((second / (eps * eps) - 0.125).abs() < 1e-4);
        // collinear pair on a ray: d_K is affine there
        let s = k.distance(&[2.0, 0.0]) + k.distance(&[3.0, 0.0]) - 2.0 * k.distance(&[2.5, 0.0]);
        assert!(s.abs() < 1e-15);

        let c = estimate_dk_semiconcavity(&k, 1.0, 2000, &[0.2, 0.05, 0.01], 3).unwrap();
        assert!(c > 0.1 && c <= 0.25 + 1e-9, "{c}");
    }

    #[test]
    fn calibrate_stores_constant() {
        let mut k = TargetSpec::ball(vec![0.0], 1.0).unwrap();
        let c = k.calibrate_dk(0.5, 100, &[0.1], 0).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(k.dk_shell_r, 0.5);
    }
}
