//! Building initial histories, measuring them, and round-tripping to CSV.

use mintau::{HistoryPath, LipschitzClass};

fn main() -> mintau::Result<()> {
    let tau = 0.5;
    let ramp = HistoryPath::from_fn(2, tau, 32, |s| vec![2.0 + 0.8 * s, 0.3 * (4.0 * s).sin()])?;
    println!("dim {} delay {} intervals {}", ramp.dim(), ramp.delay(), ramp.intervals());
    println!("x(0) = {:?}", ramp.head());
    println!("x(-tau/3) = {:?}", ramp.eval(-tau / 3.0)?);
    println!("sup norm {:.6}, Lipschitz constant {:.6}", ramp.sup_norm(), ramp.lip_constant());

    for bound in [1.0, 1.5] {
        println!("in Lip({bound}): {}", LipschitzClass::new(bound).contains(&ramp));
    }

    let flat = HistoryPath::constant(&[2.0, 0.0], tau, 32)?;
    let gap = ramp.diff(&flat)?;
    println!("|ramp - flat| = {:.6}", gap.sup_norm());

    let mut buf = Vec::new();
    ramp.write_csv(&mut buf)?;
    let back = HistoryPath::read_csv(buf.as_slice())?;
    println!("csv round trip error {:.3e}", back.diff(&ramp)?.sup_norm());
    print!("{}", String::from_utf8_lossy(&buf).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
