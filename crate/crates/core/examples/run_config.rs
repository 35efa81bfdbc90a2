//! Load a JSON problem file and run every configured experiment.
//!
//! `cargo run --example run_config -- configs/scalar_decay.json`

use std::path::PathBuf;

use mintau::cli::{certify, Check};
use mintau::config::ProblemConfig;

fn main() -> mintau::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/unit_speed_2d.json"));
    let p = ProblemConfig::load(&path)?.build()?;
    let cert = p.petrov_certificate()?;
    let params = p.steering_params(&cert)?;
    println!("{}: tau {}, dt {}, mu {:.6}, C {:.6}", p.name, p.tau, p.dt, params.mu, params.c_bound);
    for (name, x) in &p.histories {
        let v = p.oracle().value(x)?;
        println!("  T({name}) = {}", v.map_or("unreached".into(), |t| format!("{t:.9}")));
    }
    for check in [Check::Dpp, Check::DistanceBound, Check::Lipschitz, Check::Semiconcavity, Check::BoundaryLemma] {
        match certify(&p, &params, check) {
            Ok(r) => println!("{:>15}: {} (worst {:.3e})", check.slug(), r.verdict.name(), r.worst_violation),
            Err(e) => println!("{:>15}: {e}", check.slug()),
        }
    }
    Ok(())
}
