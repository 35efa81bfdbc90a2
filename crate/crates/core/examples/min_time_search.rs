//! Branch and bound over piecewise-constant controls, against the closed form.

use mintau::mintime::{min_time_analytic, min_time_search, SearchConfig};
use mintau::problem::planar_directions;
use mintau::{DynamicsSpec, HistoryPath, TargetSpec};

fn main() -> mintau::Result<()> {
    let tau = 0.5;
    let dt = tau / 128.0;
    let k = TargetSpec::ball(vec![0.0, 0.0], 1.0)?;
    let dyn_ = DynamicsSpec::unit_speed(planar_directions(16))?;

    for (z, label) in [([2.0, 0.0], "on a grid ray"), ([1.8, 0.9], "between rays")] {
        let x0 = HistoryPath::constant(&z, tau, 64)?;
        let exact = min_time_analytic(&x0, &dyn_, &k)?;
        println!("{label}: d_K = {:.9}, best straight line {:.9}", k.distance(&z), exact.value);
        for mesh in [0.5, 0.25] {
            let cfg = SearchConfig::new(mesh, 2.0, dt);
            let r = min_time_search(&x0, &dyn_, &k, &cfg)?.expect("reachable");
            println!(
                "  mesh {mesh:4}: T = {:.9}, {} nodes, word {:?}",
                r.value,
                r.nodes_explored,
                r.control.segments().iter().map(|s| s.1).collect::<Vec<_>>()
            );
            let replay = r.replay(&x0, &dyn_, &k, dt)?.unwrap();
            assert!((replay - r.value).abs() <= 1e-8);
        }
    }

    // pruning leaves the value alone and cuts the tree
    let x0 = HistoryPath::constant(&[1.8, 0.9], tau, 64)?;
    let mut cfg = SearchConfig::new(0.5, 1.5, dt);
    let pruned = min_time_search(&x0, &dyn_, &k, &cfg)?.unwrap();
    cfg.prune = false;
    let full = min_time_search(&x0, &dyn_, &k, &cfg)?.unwrap();
    println!(
        "pruned {:.9} in {} nodes, exhaustive {:.9} in {} nodes",
        pruned.value, pruned.nodes_explored, full.value, full.nodes_explored
    );

    let decay = DynamicsSpec::scalar_decay(2.0, vec![-1.0, 1.0])?;
    let interval = TargetSpec::ball(vec![0.0], 0.5)?;
    let x0 = HistoryPath::from_fn(1, 0.1, 64, |s| vec![0.75 - 3.0 * s])?;
    let r = min_time_search(&x0, &decay, &interval, &SearchConfig::new(0.025, 0.4, 0.1 / 256.0))?;
    println!("scalar decay: {:?}", r.map(|r| (r.value, r.nodes_explored)));
    Ok(())
}
