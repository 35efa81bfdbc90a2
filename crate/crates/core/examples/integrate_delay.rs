//! Method of steps on a delayed scalar system under switching controls.

use mintau::{integrate, ControlSignal, DynamicsSpec, HistoryPath, TargetSpec};

fn main() -> mintau::Result<()> {
    let tau = 0.1;
    let dt = tau / 256.0;
    let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let k = TargetSpec::ball(vec![0.0], 0.5)?;
    let x0 = HistoryPath::from_fn(1, tau, 64, |s| vec![0.8 + 2.0 * s])?;

    let controls = [
        ("constant -1", ControlSignal::constant(0)),
        ("word 0,0,1", ControlSignal::from_word(&[0, 0, 1], 0.025)?),
        ("switch at 0.0137", ControlSignal::from_segments(&[(0.0, 0), (0.0137, 1)])?),
    ];
    for (name, u) in &controls {
        let traj = integrate(&x0, u, &dyn_, 0.3, dt)?;
        let y = traj.eval(0.3)?;
        match traj.hitting_time(&k) {
            Some(t) => println!("{name:>18}: y(0.3) = {:+.9}, hits K at {t:.9}", y[0]),
            None => println!("{name:>18}: y(0.3) = {:+.9}, no hit", y[0]),
        }
    }

    // the state at time t is again a history on the same grid
    let traj = integrate(&x0, &controls[0].1, &dyn_, 0.05, dt)?;
    let y_t = traj.history_at(0.05)?;
    println!("y_0.05: head {:?}, Lipschitz {:.4}", y_t.head(), y_t.lip_constant());

    // step halving on a curved history
    let curved = HistoryPath::from_fn(1, tau, 64, |s| vec![0.8 + 20.0 * s * s])?;
    let mut prev = None;
    for p in [32usize, 64, 128, 256] {
        let y = integrate(&curved, &controls[0].1, &dyn_, 0.25, tau / p as f64)?.eval(0.25)?[0];
        if let Some(q) = prev {
            println!("P = {p:>3}: y = {y:.12}, change {:.3e}", f64::abs(y - q));
        }
        prev = Some(y);
    }
    Ok(())
}
