//! Sampling checks of the standing hypotheses and the Petrov margin.

use mintau::problem::{estimate_petrov, planar_directions, validate_h1, validate_h3, Domain};
use mintau::{DynamicsSpec, Error, TargetSpec};

fn main() -> mintau::Result<()> {
    let disc = TargetSpec::ball(vec![0.0, 0.0], 1.0)?;
    let dyn_ = DynamicsSpec::unit_speed(planar_directions(16))?;
    let domain = Domain::new(vec![-3.0, -3.0], vec![3.0, 3.0])?;

    print!("{}", validate_h1(&dyn_, &domain, 21, 0)?.to_text());
    print!("{}", validate_h3(&dyn_, &domain, 21, &[0.1, 0.05, 0.025])?.to_text());

    let cert = estimate_petrov(&dyn_, &disc, 1.0, 64)?;
    println!("mu = {:.10} (cos(pi/16) = {:.10})", cert.mu, (std::f64::consts::PI / 16.0).cos());
    println!("certificate replays to {:.3e}", cert.replay(&dyn_, &disc));

    let decay = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let line = Domain::new(vec![-0.95], vec![0.95])?;
    let h1 = validate_h1(&decay, &line, 41, 0)?;
    println!("scalar decay H1 passed: {}, measured {:?}", h1.passed, h1.measured);

    // only pushing right: no control points into K from the right-hand side
    let one_sided = DynamicsSpec::unit_speed(vec![vec![1.0]])?;
    let interval = TargetSpec::ball(vec![0.0], 1.0)?;
    match estimate_petrov(&one_sided, &interval, 1.0, 64) {
        Err(Error::PetrovViolation { point, value, .. }) => {
            println!("Petrov fails at z = {point:?} with min inner product {value}")
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
