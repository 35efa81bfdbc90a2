//! Dynamic programming, distance bound and Lipschitz checks on a delayed target problem.

use mintau::mintime::{SearchConfig, ValuePolicy};
use mintau::problem::estimate_petrov;
use mintau::regularity::{check_distance_bound, check_dpp, estimate_lipschitz, Oracle};
use mintau::steering::derive_constants;
use mintau::{ControlSignal, DynamicsSpec, HistoryPath, TargetSpec};

fn main() -> mintau::Result<()> {
    let tau = 0.1;
    let dt = tau / 256.0;
    let dyn_ = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let k = TargetSpec::ball(vec![0.0], 0.5)?;
    let cert = estimate_petrov(&dyn_, &k, 0.4, 64)?;
    let params = derive_constants(cert.mu, cert.sigma, 2.0, 2.0, 1.0, tau)?;
    let oracle = Oracle::new(&dyn_, &k, ValuePolicy::auto(SearchConfig::new(0.025, 0.4, dt)));

    let line = |head: f64, slope: f64| HistoryPath::from_fn(1, tau, 64, move |s| vec![head + slope * s]);
    let x0 = line(0.75, 1.0)?;
    let words: Vec<ControlSignal> = [vec![0], vec![1], vec![0, 1, 0], vec![1, 1, 0, 0]]
        .iter()
        .map(|w| ControlSignal::from_word(w, 0.025))
        .collect::<mintau::Result<_>>()?;
    let dpp = check_dpp(&x0, &oracle, &[0.0, 0.025, 0.05, 0.1], &words)?;
    print!("{}", dpp.to_text());

    let samples = [line(0.6, 0.0)?, line(0.7, 1.5)?, line(-0.75, -1.0)?, line(0.5, 0.0)?];
    print!("\n{}", check_distance_bound(&samples, &oracle, &params, 0.01)?.to_text());

    let pairs = vec![(line(0.6, 0.0)?, line(0.62, 0.0)?), (line(0.7, 1.0)?, line(0.7, 1.2)?)];
    print!("\n{}", estimate_lipschitz(&pairs, &oracle, &params)?.to_text());
    Ok(())
}
