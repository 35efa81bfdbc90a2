mod common;

use mintau::{integrate, ControlSignal, DynamicsSpec, HistoryPath};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 0.5;
const DT: f64 = TAU / 64.0;

proptest! {
    #[test]
    fn unit_speed_constant_control_is_a_straight_line(
        head in prop::collection::vec(-3.0..3.0f64, 2),
        u in 0usize..8,
        t_end in 0.1..2.0f64,
        probe in 0.0..=1.0f64,
    ) {
        let dyn_ = DynamicsSpec::unit_speed(mintau::problem::planar_directions(8)).unwrap();
        let x = HistoryPath::constant(&head, TAU, 16).unwrap();
        let traj = integrate(&x, &ControlSignal::constant(u), &dyn_, t_end, DT).unwrap();
        let t = probe * traj.t_end();
        let y = traj.eval(t).unwrap();
        let v = &dyn_.controls()[u];
        for k in 0..2 {
            prop_assert!((y[k] - (head[k] + t * v[k])).abs() <= 1e-12 * (1.0 + t));
        }
    }

    #[test]
    fn scalar_decay_first_delay_interval_is_affine(c in -2.0..2.0f64, u in 0usize..2, probe in 0.0..=1.0f64) {
        // constant history: the delayed argument is c on [0, tau]
        let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0]).unwrap();
        let x = HistoryPath::constant(&[c], TAU, 16).unwrap();
        let traj = integrate(&x, &ControlSignal::constant(u), &dyn_, TAU, DT).unwrap();
        let slope = (dyn_.controls()[u][0] - c).clamp(-2.0, 2.0);
        let t = probe * TAU;
        prop_assert!((traj.eval(t).unwrap()[0] - (c + slope * t)).abs() <= 1e-12);
    }

    #[test]
    fn restarting_from_the_state_matches_one_run(seed in 0u64..1000, k1 in 8usize..64, k2 in 8usize..64, u in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0]).unwrap();
        let x = common::random_history(&mut rng, &[0.3], 1.5, TAU, 64);
        let (t1, t2) = (k1 as f64 * DT, k2 as f64 * DT);
        let ctl = ControlSignal::constant(u);
        let whole = integrate(&x, &ctl, &dyn_, t1 + t2, DT).unwrap();
        let first = integrate(&x, &ctl, &dyn_, t1, DT).unwrap();
        let mid = first.history_at(t1).unwrap();
        let rest = integrate(&mid, &ctl, &dyn_, t2, DT).unwrap();
        let a = whole.eval(t1 + t2).unwrap()[0];
        let b = rest.eval(t2).unwrap()[0];
        // dt = tau / 64 puts every integrator row on the 64-interval history grid, so the restart loses nothing
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn integration_is_deterministic(seed in 0u64..1000, word in prop::collection::vec(0usize..2, 1..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0]).unwrap();
        let x = common::random_history(&mut rng, &[-0.2], 1.0, TAU, 64);
        let ctl = ControlSignal::from_word(&word, 0.125).unwrap();
        let a = integrate(&x, &ctl, &dyn_, 1.0, DT).unwrap();
        let b = integrate(&x, &ctl, &dyn_, 1.0, DT).unwrap();
        let pa: Vec<f64> = a.points().iter().map(|(_, y)| y[0]).collect();
        let pb: Vec<f64> = b.points().iter().map(|(_, y)| y[0]).collect();
        prop_assert_eq!(pa, pb);
    }

    #[test]
    fn off_grid_switch_matches_piecewise_oracle(s in 0.01..0.49f64) {
        // unit speed: position is the integral of the control, wherever it switches
        let dyn_ = DynamicsSpec::unit_speed(vec![vec![-1.0], vec![1.0]]).unwrap();
        let x = HistoryPath::constant(&[0.0], TAU, 16).unwrap();
        let ctl = ControlSignal::from_segments(&[(0.0, 1), (s, 0)]).unwrap();
        let traj = integrate(&x, &ctl, &dyn_, 0.5, DT).unwrap();
        prop_assert!((traj.eval(0.5).unwrap()[0] - (s - (0.5 - s))).abs() <= 1e-12);
    }
}

#[test]
fn rejects_delay_not_a_multiple_of_dt() {
    let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0]).unwrap();
    let x = HistoryPath::constant(&[0.0], 0.5, 16).unwrap();
    assert!(integrate(&x, &ControlSignal::constant(0), &dyn_, 1.0, 0.3).is_err());
}
