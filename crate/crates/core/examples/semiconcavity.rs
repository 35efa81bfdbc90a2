//! Second differences of the minimum time over dyadic scales, and the boundary lemma.

use mintau::mintime::{SearchConfig, ValuePolicy};
use mintau::problem::{estimate_petrov, planar_directions};
use mintau::regularity::{check_boundary_lemma, estimate_semiconcavity, lemma_radius, Oracle, SCALES};
use mintau::steering::derive_constants;
use mintau::{DynamicsSpec, HistoryPath, TargetSpec};

fn main() -> mintau::Result<()> {
    let tau = 0.5;
    let eps = 0.2;
    let mut controls = planar_directions(8);
    for lam in SCALES {
        for y in [lam * eps, -lam * eps] {
            let n = 2.0f64.hypot(y);
            controls.push(vec![-2.0 / n, -y / n]);
        }
    }
    let dyn_ = DynamicsSpec::unit_speed(controls)?;
    let disc = TargetSpec::ball(vec![0.0, 0.0], 1.0)?;
    let oracle = Oracle::new(&dyn_, &disc, ValuePolicy::auto(SearchConfig::new(0.25, 2.0, tau / 128.0)));
    let cert = estimate_petrov(&dyn_, &disc, 1.0, 64)?;
    let params = derive_constants(cert.mu, cert.sigma, 1.0, 1.0, 0.0, tau)?;

    let x = HistoryPath::constant(&[2.0, 0.0], tau, 64)?;
    let h = HistoryPath::constant(&[0.0, eps], tau, 64)?;
    let est = estimate_semiconcavity(&x, &[h], &oracle, &params)?;
    println!("scale     ratio     closed form");
    for (s, r) in est.h_scales.iter().zip(&est.ratio_by_scale) {
        println!("{s:6.4}  {r:.8}  {:.8}", 2.0 / ((4.0 + s * s).sqrt() + 2.0));
    }
    println!("stable: {}", est.stable);

    let rho = lemma_radius(&params, 0.5);
    let boundary = HistoryPath::constant(&[1.0, 0.0], tau, 64)?;
    let family = [
        HistoryPath::constant(&[0.5 * rho, 0.0], tau, 64)?,
        HistoryPath::constant(&[0.6 * rho, 0.3 * rho], tau, 64)?,
    ];
    let report = check_boundary_lemma(&boundary, &family, &oracle, &params, rho)?;
    print!("\n{}", report.to_text());

    let decay = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let interval = TargetSpec::ball(vec![0.0], 0.5)?;
    let c = estimate_petrov(&decay, &interval, 0.4, 64)?;
    let p = derive_constants(c.mu, c.sigma, 2.0, 2.0, 1.0, 0.2)?;
    let o = Oracle::new(&decay, &interval, ValuePolicy::auto(SearchConfig::new(0.05, 0.4, 0.2 / 256.0)));
    let x = HistoryPath::constant(&[0.8], 0.2, 64)?;
    match estimate_semiconcavity(&x, &[HistoryPath::constant(&[0.05], 0.2, 64)?], &o, &p) {
        Ok(e) => println!("tau 0.2: modulus {}", e.modulus),
        Err(e) => println!("\ntau 0.2: {e}"),
    }
    Ok(())
}
