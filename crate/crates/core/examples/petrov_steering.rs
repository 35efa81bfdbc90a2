//! Steering into the target with Petrov controls and distance-proportional steps.

use mintau::problem::{estimate_petrov, planar_directions};
use mintau::steering::{derive_constants, steer};
use mintau::{DynamicsSpec, HistoryPath, TargetSpec};

fn main() -> mintau::Result<()> {
    let tau = 0.5;
    let dt = tau / 128.0;
    let k = TargetSpec::ball(vec![0.0, 0.0], 1.0)?;
    let dyn_ = DynamicsSpec::unit_speed(planar_directions(16))?;
    let cert = estimate_petrov(&dyn_, &k, 1.0, 64)?;
    let params = derive_constants(cert.mu, cert.sigma, dyn_.bound_m, 1.0, dyn_.lipschitz_l, tau)?;
    println!(
        "mu {:.6}  k {:.6}  C {:.6}  delta {:.6}",
        params.mu, params.k_contraction, params.c_bound, params.delta
    );

    let a: f64 = 0.7;
    let x0 = HistoryPath::from_fn(2, tau, 64, |s| vec![1.6 * a.cos() + 0.5 * s, 1.6 * a.sin()])?;
    let out = steer(&x0, &dyn_, &k, &params, dt)?;
    println!(" j        d_j        t_j  u   ratio");
    for s in out.log.steps.iter().take(8) {
        println!("{:2} {:10.3e} {:10.3e} {:2} {:7.4}", s.j, s.distance, s.step_time, s.control, s.ratio);
    }
    println!("... {} steps", out.log.steps.len());
    let d0 = k.distance(x0.head());
    println!(
        "total time {:.6} <= C d0 = {:.6}; final distance {:.3e}",
        out.total_time,
        params.c_bound * d0,
        out.final_distance
    );

    // delay term: the same target under state-dependent dynamics
    let decay = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let interval = TargetSpec::ball(vec![0.0], 0.5)?;
    let c = estimate_petrov(&decay, &interval, 0.4, 64)?;
    for tau in [0.1, 0.3, 0.9] {
        match derive_constants(c.mu, c.sigma, 2.0, 2.0, 1.0, tau) {
            Ok(p) => println!("tau {tau}: k {:.4}, C {:.4}", p.k_contraction, p.c_bound),
            Err(e) => println!("tau {tau}: {e}"),
        }
    }
    Ok(())
}
