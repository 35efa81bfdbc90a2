//! Method-of-steps integration of `y'(t) = f(y(t - tau), u(t))`.
//!
//! The delay is an integer number `P` of steps, so the delayed argument of a
//! full step always sits on stored samples and the trapezoid rule
//!
//! ```text
//! y_{k+1} = y_k + dt/2 * [ f(y_{k-P}, u_k) + f(y_{k+1-P}, u_k) ]
//! ```
//!
//! is fully explicit. Steps that contain a control switch, and a trailing
//! partial step when `t_end` is off the grid, are split into sub-intervals
//! whose delayed arguments are read by linear interpolation of the past.

use std::io::Write;

use crate::error::{Error, Result};
use crate::funcspace::HistoryPath;
use crate::point;
use crate::problem::{DynamicsSpec, TargetSpec};
use crate::report::{fmt_num, write_rows};

/// Default number of integration steps per delay interval.
pub const DEFAULT_STEPS_PER_DELAY: usize = 256;

/// Hitting times are refined to `TOL_THETA_REL * t_end`.
pub const TOL_THETA_REL: f64 = 1e-8;

/// Piecewise-constant control. Segment `i` covers
/// `[breakpoints[i], breakpoints[i+1])` with control `indices[i]`; `tail`
/// applies from the last breakpoint on.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    breakpoints: Vec<f64>,
    indices: Vec<usize>,
    tail: usize,
}

impl ControlSignal {
    pub fn constant(index: usize) -> Self {
        Self {
            breakpoints: vec![0.0],
            indices: Vec::new(),
            tail: index,
        }
    }

    /// From `(start_time, index)` pairs; the first start must be 0 and
    /// starts must increase strictly. The last pair becomes the tail.
    pub fn from_segments(segments: &[(f64, usize)]) -> Result<Self> {
        let (first, _) = segments
            .first()
            .ok_or_else(|| Error::Invalid("control needs at least one segment".into()))?;
        if *first != 0.0 {
            return Err(Error::Invalid(format!(
                "first control segment must start at 0, got {first}"
            )));
        }
        if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Invalid("control breakpoints must increase strictly".into()));
        }
        let breakpoints = segments.iter().map(|s| s.0).collect();
        let indices = segments[..segments.len() - 1].iter().map(|s| s.1).collect();
        Ok(Self {
            breakpoints,
            indices,
            tail: segments[segments.len() - 1].1,
        })
    }

    /// One control index per cell of width `mesh`, holding the last one after.
    pub fn from_word(word: &[usize], mesh: f64) -> Result<Self> {
        if word.is_empty() {
            return Ok(Self::constant(0));
        }
        let segs: Vec<(f64, usize)> = word
            .iter()
            .enumerate()
            .map(|(i, c)| (i as f64 * mesh, *c))
            .collect();
        Self::from_segments(&segs)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> Vec<(f64, usize)> {
        self.breakpoints
            .iter()
            .copied()
            .zip(self.indices.iter().copied().chain(std::iter::once(self.tail)))
            .collect()
    }

    /// Control active on the right-open interval containing `t`.
    pub fn index_at(&self, t: f64) -> usize {
        match self.breakpoints.partition_point(|b| *b <= t) {
            0 => self.first_index(),
            s if s > self.indices.len() => self.tail,
            s => self.indices[s - 1],
        }
    }

    fn first_index(&self) -> usize {
        self.indices.first().copied().unwrap_or(self.tail)
    }

    pub fn validate(&self, n_controls: usize) -> Result<()> {
        match self
            .indices
            .iter()
            .chain(std::iter::once(&self.tail))
            .find(|i| **i >= n_controls)
        {
            Some(i) => Err(Error::Invalid(format!(
                "control index {i} out of range for {n_controls} controls"
            ))),
            None => Ok(()),
        }
    }

    fn switches_in(&self, a: f64, b: f64, eps: f64) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints
            .iter()
            .copied()
            .filter(move |t| *t > a + eps && *t < b - eps)
    }
}

/// Number of steps per delay, requiring `tau / dt` to be an integer.
pub fn steps_per_delay(tau: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let ratio = tau / dt;
    let p = ratio.round();
    if p < 1.0 || (ratio - p).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "tau/dt = {ratio} is not a positive integer (tau = {tau}, dt = {dt})"
        )));
    }
    Ok(p as usize)
}

/// One trapezoid sub-step of length `h` from `y` with the delayed values at
/// both ends of the sub-interval already known.
#[inline]
pub(crate) fn trapezoid_step(
    dyn_: &DynamicsSpec,
    control: usize,
    y: &[f64],
    delayed_start: &[f64],
    delayed_end: &[f64],
    h: f64,
) -> Vec<f64> {
    let fa = dyn_.eval(delayed_start, control);
    let fb = dyn_.eval(delayed_end, control);
    y.iter()
        .zip(fa.iter().zip(&fb))
        .map(|(yi, (a, b))| yi + 0.5 * h * (a + b))
        .collect()
}

/// Append `n_steps` full steps under a constant control to `buf`, a flat
/// row-major buffer whose last `p + 1` rows span the current delay window.
pub(crate) fn extend_constant(
    dyn_: &DynamicsSpec,
    control: usize,
    buf: &mut Vec<f64>,
    p: usize,
    n_steps: usize,
    dt: f64,
) {
    let n = dyn_.dim_state();
    buf.reserve(n_steps * n);
    for _ in 0..n_steps {
        let rows = buf.len() / n;
        let cur = rows - 1;
        let next = {
            let y = &buf[cur * n..(cur + 1) * n];
            let da = &buf[(cur - p) * n..(cur - p + 1) * n];
            let db = &buf[(cur + 1 - p) * n..(cur + 2 - p) * n];
            trapezoid_step(dyn_, control, y, da, db, dt)
        };
        buf.extend(next);
    }
}

/// First time in `(lo, hi]` at which `inside` becomes true, given
/// `inside(lo) == false` and `inside(hi) == true`, refined until the bracket
/// is narrower than `tol`. Returns the upper end of the final bracket.
pub(crate) fn bisect_entry<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, inside: F) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Dense solution on `[-tau, t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    delay: f64,
    dt: f64,
    p: usize,
    history_intervals: usize,
    // rows k = -p ..= k_full at times k * dt
    rows: Vec<f64>,
    k_full: usize,
    // trailing partial step, when t_end is off the grid
    tail: Option<(f64, Vec<f64>)>,
    t_end: f64,
    control: ControlSignal,
}

/// Solve the delayed system from history `x0` under control `u` up to `t_end`.
pub fn integrate(
    x0: &HistoryPath,
    u: &ControlSignal,
    dyn_: &DynamicsSpec,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if x0.dim() != dyn_.dim_state() {
        return Err(Error::Shape(format!(
            "history has dimension {}, dynamics {}",
            x0.dim(),
            dyn_.dim_state()
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Invalid(format!("t_end must be positive, got {t_end}")));
    }
    u.validate(dyn_.n_controls())?;
    let tau = x0.delay();
    let p = steps_per_delay(tau, dt)?;
    let n = x0.dim();

    let mut rows = Vec::with_capacity((p + 1) * n);
    for i in 0..p {
        rows.extend(x0.eval_clamped(-tau + i as f64 * dt));
    }
    rows.extend_from_slice(x0.head());

    let grid_steps = t_end / dt;
    let mut k_full = grid_steps.floor() as usize;
    let mut rem = t_end - k_full as f64 * dt;
    if rem > dt * (1.0 - 1e-9) {
        k_full += 1;
        rem = 0.0;
    }
    if rem < 1e-9 * dt {
        rem = 0.0;
    }
    let eps = 1e-9 * dt;
    let row = |rows: &Vec<f64>, k: usize| -> Vec<f64> { rows[k * n..(k + 1) * n].to_vec() };
    // sub-stepped advance over [t_k, t_k + span]; index k counts from the first history row
    let advance = |rows: &Vec<f64>, k: usize, t_a: f64, span: f64| -> Vec<f64> {
        let mut cuts = vec![t_a];
        cuts.extend(u.switches_in(t_a, t_a + span, eps));
        cuts.push(t_a + span);
        let past_lo = row(rows, k - p);
        let past_hi = row(rows, k + 1 - p);
        let delayed = |t: f64| point::lerp(&past_lo, &past_hi, (t - t_a) / dt);
        let mut y = row(rows, k);
        for w in cuts.windows(2) {
            let c = u.index_at(w[0] + eps);
            y = trapezoid_step(dyn_, c, &y, &delayed(w[0]), &delayed(w[1]), w[1] - w[0]);
        }
        y
    };

    for k in 0..k_full {
        let t_a = k as f64 * dt;
        let idx = k + p;
        let simple = u.switches_in(t_a, t_a + dt, eps).next().is_none();
        let next = if simple {
            let c = u.index_at(t_a + eps);
            trapezoid_step(
                dyn_,
                c,
                &rows[idx * n..(idx + 1) * n],
                &rows[k * n..(k + 1) * n],
                &rows[(k + 1) * n..(k + 2) * n],
                dt,
            )
        } else {
            advance(&rows, idx, t_a, dt)
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: t_a + dt });
        }
        rows.extend(next);
    }
    let tail = if rem > 0.0 {
        let t_a = k_full as f64 * dt;
        let y = advance(&rows, k_full + p, t_a, rem);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: t_end });
        }
        Some((t_end, y))
    } else {
        None
    };
    let t_end = if tail.is_some() { t_end } else { k_full as f64 * dt };
    Ok(Trajectory {
        dim: n,
        delay: tau,
        dt,
        p,
        history_intervals: x0.intervals(),
        rows,
        k_full,
        tail,
        t_end,
        control: u.clone(),
    })
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn control(&self) -> &ControlSignal {
        &self.control
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.rows[k * self.dim..(k + 1) * self.dim]
    }

    /// Stored solution points for `t >= 0`, including a trailing partial step.
    pub fn points(&self) -> Vec<(f64, &[f64])> {
        let mut out: Vec<(f64, &[f64])> = (0..=self.k_full)
            .map(|k| (k as f64 * self.dt, self.row(k + self.p)))
            .collect();
        if let Some((t, y)) = &self.tail {
            out.push((*t, y.as_slice()));
        }
        out
    }

    /// `y(t)` for `t in [-tau, t_end]`, linear between stored samples.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let slack = 1e-12 * (self.t_end + self.delay);
        if !(t >= -self.delay - slack && t <= self.t_end + slack) {
            return Err(Error::Domain {
                t,
                lo: -self.delay,
                hi: self.t_end,
            });
        }
        Ok(self.eval_clamped(t))
    }

    fn eval_clamped(&self, t: f64) -> Vec<f64> {
        let grid_end = self.k_full as f64 * self.dt;
        if t > grid_end {
            if let Some((te, y)) = &self.tail {
                let w = ((t - grid_end) / (te - grid_end)).min(1.0);
                return point::lerp(self.row(self.k_full + self.p), y, w);
            }
        }
        let last = (self.k_full + self.p) as f64;
        let pos = ((t + self.delay) / self.dt).clamp(0.0, last);
        let near = pos.round();
        if (pos - near).abs() < 1e-9 {
            return self.row(near as usize).to_vec();
        }
        let i = pos.floor() as usize;
        point::lerp(self.row(i), self.row(i + 1), pos - i as f64)
    }

    /// The state `y_t(s) = y(t + s)` on the history grid of the initial datum.
    pub fn history_at(&self, t: f64) -> Result<HistoryPath> {
        let slack = 1e-12 * (self.t_end + self.delay);
        if !(t >= -slack && t <= self.t_end + slack) {
            return Err(Error::Domain {
                t,
                lo: 0.0,
                hi: self.t_end,
            });
        }
        let t = t.clamp(0.0, self.t_end);
        let mut path = HistoryPath::from_fn(self.dim, self.delay, self.history_intervals, |s| {
            self.eval_clamped(t + s)
        })?;
        // pin y_t(0) to y(t) exactly
        if path.head() != self.eval_clamped(t).as_slice() {
            let mut flat = path.as_flat().to_vec();
            let n = self.dim;
            let len = flat.len();
            flat[len - n..].copy_from_slice(&self.eval_clamped(t));
            path = HistoryPath::from_flat(n, self.delay, flat)?;
        }
        Ok(path)
    }

    /// First time with `d_K(y(t)) <= 0`, or `None` if no stored sample enters K.
    pub fn hitting_time(&self, target: &TargetSpec) -> Option<f64> {
        let tol = TOL_THETA_REL * self.t_end;
        let pts = self.points();
        if target.contains(pts[0].1) {
            return Some(0.0);
        }
        for w in pts.windows(2) {
            let ((ta, _), (tb, yb)) = (w[0], w[1]);
            if target.contains(yb) {
                return Some(bisect_entry(ta, tb, tol, |t| {
                    target.contains(&self.eval_clamped(t))
                }));
            }
        }
        None
    }

    /// Export rows `t, y_1..y_n, d_K, control` (history rows have an empty control).
    pub fn write_csv<W: Write>(&self, out: W, target: &TargetSpec) -> Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("y_{k}")));
        header.push("d_K".into());
        header.push("control".into());
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut rows = Vec::new();
        let mut push = |t: f64, y: &[f64], c: Option<usize>| {
            let mut r = vec![fmt_num(t)];
            r.extend(y.iter().map(|v| fmt_num(*v)));
            r.push(fmt_num(target.distance(y)));
            r.push(c.map_or(String::new(), |c| c.to_string()));
            rows.push(r);
        };
        for k in 0..self.p {
            push(-self.delay + k as f64 * self.dt, self.row(k), None);
        }
        for (t, y) in self.points() {
            push(t, y, Some(self.control.index_at(t)));
        }
        write_rows(out, &header_refs, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_1d() -> DynamicsSpec {
        DynamicsSpec::unit_speed(vec![vec![-1.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn constant_speed_is_exact() {
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let tr = integrate(&x0, &ControlSignal::constant(0), &line_1d(), 1.0, 0.5 / 256.0).unwrap();
        assert!((tr.eval(1.0).unwrap()[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_incommensurate_step() {
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let e = integrate(&x0, &ControlSignal::constant(0), &line_1d(), 1.0, 0.3);
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn control_signal_segments() {
        let u = ControlSignal::from_segments(&[(0.0, 1), (0.5, 0), (1.0, 2)]).unwrap();
        assert_eq!(u.index_at(0.0), 1);
        assert_eq!(u.index_at(0.49), 1);
        assert_eq!(u.index_at(0.5), 0);
        assert_eq!(u.index_at(7.0), 2);
        assert!(u.validate(2).is_err());
        assert!(ControlSignal::from_segments(&[(0.1, 0)]).is_err());
        assert!(ControlSignal::from_segments(&[(0.0, 0), (0.0, 1)]).is_err());
        assert_eq!(ControlSignal::constant(3).index_at(0.0), 3);
        let w = ControlSignal::from_word(&[0, 1, 1], 0.25).unwrap();
        assert_eq!(w.index_at(0.3), 1);
        assert_eq!(w.index_at(0.1), 0);
    }

    #[test]
    fn off_grid_switch_and_end() {
        // unit speed: exact regardless of where the switch falls
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let u = ControlSignal::from_segments(&[(0.0, 0), (0.3001, 1)]).unwrap();
        let tr = integrate(&x0, &u, &line_1d(), 0.70017, 0.5 / 256.0).unwrap();
        let expect = 2.0 - 0.3001 + (0.70017 - 0.3001);
        assert!((tr.eval(0.70017).unwrap()[0] - expect).abs() < 1e-13);
        assert_eq!(tr.t_end(), 0.70017);
    }

    #[test]
    fn history_at_examples() {
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let tr = integrate(&x0, &ControlSignal::constant(0), &line_1d(), 1.0, 0.5 / 256.0).unwrap();
        assert_eq!(tr.history_at(0.0).unwrap(), x0);
        let h = tr.history_at(0.5).unwrap();
        for (i, p) in h.samples().enumerate() {
            let s = h.grid_time(i);
            assert!((p[0] - (2.0 - (0.5 + s))).abs() < 1e-13);
        }
        assert!(matches!(tr.history_at(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn hitting_time_examples() {
        let k = TargetSpec::ball(vec![0.0], 1.0).unwrap();
        let x0 = HistoryPath::constant(&[2.0], 0.5, 64).unwrap();
        let dt = 0.5 / 256.0;
        let tr = integrate(&x0, &ControlSignal::constant(0), &line_1d(), 2.0, dt).unwrap();
        let th = tr.hitting_time(&k).unwrap();
        assert!((th - 1.0).abs() <= TOL_THETA_REL * 2.0);

        let inside = HistoryPath::constant(&[0.5], 0.5, 64).unwrap();
        let tr = integrate(&inside, &ControlSignal::constant(1), &line_1d(), 1.0, dt).unwrap();
        assert_eq!(tr.hitting_time(&k), Some(0.0));

        let tr = integrate(&x0, &ControlSignal::constant(1), &line_1d(), 2.0, dt).unwrap();
        assert_eq!(tr.hitting_time(&k), None);
    }

    #[test]
    fn csv_has_expected_columns() {
        let k = TargetSpec::ball(vec![0.0], 1.0).unwrap();
        let x0 = HistoryPath::constant(&[2.0], 0.5, 4).unwrap();
        let tr = integrate(&x0, &ControlSignal::constant(0), &line_1d(), 0.5, 0.125).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, &k).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,y_1,d_K,control");
        // 4 history rows (-0.5 .. -0.125) + 5 rows for t = 0 .. 0.5
        assert_eq!(lines.len(), 1 + 4 + 5);
        assert!(lines[1].ends_with(','));
        assert!(lines.last().unwrap().ends_with(",0"));
    }
}
