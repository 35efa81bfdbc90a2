#![allow(dead_code)]

use std::path::PathBuf;

use mintau::config::{Problem, ProblemConfig};
use mintau::HistoryPath;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.json"))
}

pub fn problem(name: &str) -> Problem {
    ProblemConfig::load(&config_path(name)).unwrap().build().unwrap()
}

/// Random piecewise-linear history ending at `head`, each segment's slope
/// drawn with norm at most `lip`.
pub fn random_history(
    rng: &mut ChaCha8Rng,
    head: &[f64],
    lip: f64,
    delay: f64,
    intervals: usize,
) -> HistoryPath {
    let n = head.len();
    let h = delay / intervals as f64;
    let mut rows = vec![head.to_vec()];
    for _ in 0..intervals {
        let slope = random_in_ball(rng, n, lip);
        let prev: Vec<f64> = rows
            .last()
            .unwrap()
            .iter()
            .zip(&slope)
            .map(|(v, m)| v - h * m)
            .collect();
        rows.push(prev);
    }
    rows.reverse();
    HistoryPath::new(delay, &rows).unwrap()
}

pub fn random_in_ball(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1.0 {
            return v.into_iter().map(|x| x * r).collect();
        }
    }
}

/// A point at distance `d` outside the unit disc in direction `angle`.
pub fn disc_point(angle: f64, d: f64) -> Vec<f64> {
    vec![(1.0 + d) * angle.cos(), (1.0 + d) * angle.sin()]
}

/// A head at distance `d0` from the first target ball: a random angle in
/// the plane, a random side on the line.
pub fn head_at_distance(rng: &mut ChaCha8Rng, p: &Problem, d0: f64) -> Vec<f64> {
    let c = &p.target.centers()[0];
    let r = p.target.radii()[0];
    if p.dyn_.dim_state() == 2 {
        let a = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        vec![c[0] + (r + d0) * a.cos(), c[1] + (r + d0) * a.sin()]
    } else if rng.gen_bool(0.5) {
        vec![c[0] + r + d0]
    } else {
        vec![c[0] - r - d0]
    }
}
