mod common;

use mintau::cli::{certify, Check};
use mintau::mintime::{self, ValuePolicy};
use mintau::regularity::{self, ratios_stable, ReportVerdict};
use mintau::{integrate, HistoryPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{head_at_distance, problem, random_history};

#[test]
fn dpp_is_an_equality_along_optimal_controls() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for name in ["unit_speed_2d", "scalar_decay"] {
        let p = problem(name);
        let oracle = p.oracle();
        for _ in 0..5 {
            let d0 = rng.gen_range(0.1..0.6);
            let h = head_at_distance(&mut rng, &p, d0);
            let x0 = random_history(&mut rng, &h, 0.5, p.tau, p.history_intervals);
            let best = mintime::value(&x0, &p.dyn_, &p.target, &oracle.policy).unwrap().unwrap();
            let t = rng.gen_range(0.1..0.9) * best.value;
            let traj = integrate(&x0, &best.control, &p.dyn_, t, p.dt).unwrap();
            let y = traj.history_at(traj.t_end()).unwrap();
            let rest = oracle.value(&y).unwrap().unwrap();
            let gap = best.value - (traj.t_end() + rest);
            let tol = oracle.dpp_tolerance(best.value);
            // never violated, and tight up to the discretisation slack
            assert!(gap <= tol, "{name}: {gap:e} > {tol:e}");
            assert!(gap >= -tol, "{name}: optimal control wastes {:e}", -gap);
        }
    }
}

#[test]
fn dpp_report_passes_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let p = problem("scalar_decay");
    let oracle = p.oracle();
    let x0 = p.history("x070").unwrap();
    let controls: Vec<_> = (0..6)
        .map(|_| {
            let word: Vec<usize> = (0..12).map(|_| rng.gen_range(0..2)).collect();
            mintau::ControlSignal::from_word(&word, p.search.switch_mesh).unwrap()
        })
        .collect();
    let t0 = oracle.value(x0).unwrap().unwrap();
    let probes = [0.0, 0.3 * t0, 0.6 * t0, 0.9 * t0];
    let r = regularity::check_dpp(x0, &oracle, &probes, &controls).unwrap();
    assert_eq!(r.verdict, ReportVerdict::Pass, "{}", r.to_text());
    assert_eq!(r.samples, 24);
    // t = 0 is an identity
    for row in r.rows.iter().step_by(4) {
        assert!((row.lhs - row.rhs).abs() <= 1e-15);
    }
}

#[test]
fn certification_is_deterministic_across_thread_counts() {
    let p = problem("unit_speed_2d");
    let cert = p.petrov_certificate().unwrap();
    let params = p.steering_params(&cert).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [Check::Dpp, Check::DistanceBound, Check::Lipschitz, Check::Semiconcavity, Check::BoundaryLemma]
                .map(|c| {
                    let mut buf = Vec::new();
                    certify(&p, &params, c).unwrap().write_csv(&mut buf).unwrap();
                    buf
                })
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}

#[test]
fn lipschitz_report_matches_direct_quotients() {
    let p = problem("scalar_decay");
    let cert = p.petrov_certificate().unwrap();
    let params = p.steering_params(&cert).unwrap();
    let oracle = p.oracle();
    let a = p.history("x060").unwrap().clone();
    let b = p.history("x070").unwrap().clone();
    let r = regularity::estimate_lipschitz(&[(a.clone(), b.clone())], &oracle, &params).unwrap();
    let ta = oracle.value(&a).unwrap().unwrap();
    let tb = oracle.value(&b).unwrap().unwrap();
    let q = (ta - tb).abs() / a.diff(&b).unwrap().sup_norm();
    assert!((r.constant("max_empirical_ratio").unwrap() - q).abs() <= 1e-12);
    let modulus = params.c_bound * (1.0 + params.l * params.tau) * (params.l * ta.max(tb)).exp();
    assert!((r.constant("max_modulus").unwrap() - modulus).abs() <= 1e-12 * modulus);
    assert!(r.passed());
}

#[test]
fn disc_second_differences_follow_the_closed_form() {
    // T(x) = |x(0)| - 1 for the unit disc; at (2, 0) with h = (0, e) the
    // second difference is 2 (sqrt(4 + e^2) - 2); the closed form is used
    // since every inward direction is in the grid
    let mut controls = mintau::problem::planar_directions(16);
    for lam in regularity::SCALES {
        for y in [0.4 * lam, -0.4 * lam] {
            let n = 2.0f64.hypot(y);
            controls.push(vec![-2.0 / n, -y / n]);
        }
    }
    let d = mintau::DynamicsSpec::unit_speed(controls).unwrap();
    let k = mintau::TargetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    let grid = mintau::mintime::SearchConfig::new(0.25, 3.0, 0.5 / 64.0);
    let oracle = regularity::Oracle::new(&d, &k, ValuePolicy::auto(grid));
    let params = mintau::steering::derive_constants(1.0, 1.0, 1.0, 1.0, 0.0, 0.5).unwrap();
    let x = HistoryPath::constant(&[2.0, 0.0], 0.5, 16).unwrap();
    let h = HistoryPath::constant(&[0.0, 0.4], 0.5, 16).unwrap();
    let est = regularity::estimate_semiconcavity(&x, &[h], &oracle, &params).unwrap();
    for (lam, ratio) in regularity::SCALES.iter().zip(&est.ratio_by_scale) {
        let e = 0.4 * lam;
        let exact = 2.0 * ((4.0 + e * e).sqrt() - 2.0) / (e * e);
        assert!((ratio - exact).abs() <= 1e-9, "{ratio} vs {exact}");
    }
    assert!(est.stable);
}

#[test]
fn semiconcavity_refuses_large_delays() {
    let p = problem("scalar_decay");
    let cert = p.petrov_certificate().unwrap();
    let mut params = p.steering_params(&cert).unwrap();
    params.tau = params.semiconcavity_tau_threshold() * 1.01;
    let x = p.history("x080").unwrap();
    let fam = p.family(&p.experiments.semiconcavity.as_ref().unwrap().family).unwrap();
    let err = regularity::estimate_semiconcavity(x, fam, &p.oracle(), &params).unwrap_err();
    assert!(matches!(err, mintau::Error::DelayTooLarge { .. }), "{err}");
}

#[test]
fn lemma_radius_formula() {
    let params = mintau::steering::derive_constants(1.0, 1.0, 1.0, 1.0, 0.0, 0.5).unwrap();
    let want = 0.99 * params.delta.min(0.3) / (2.0 * (1.0 + 2.0 * params.m * params.c_bound));
    assert!((regularity::lemma_radius(&params, 0.3) - want).abs() <= 1e-15);
}

#[test]
fn stability_rule() {
    assert!(ratios_stable(&[0.5, 0.5, 0.5], &[0.0; 3]));
    assert!(ratios_stable(&[1.0, 0.6, 1.1], &[0.0; 3]));
    assert!(!ratios_stable(&[0.1, 0.5], &[0.0; 2]));
    assert!(ratios_stable(&[0.1, 0.5], &[0.0, 0.4]));
    // negative parts count as zero
    assert!(ratios_stable(&[-3.0, -0.2, -9.0], &[0.0; 3]));
}
