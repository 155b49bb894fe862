//! Moving-band inputs on the left-shift system: the output/input ratio
//! grows like 1/sqrt(eps) as the band narrows.

use iostab::stability::counterexample_sweep;

fn main() -> iostab::Result<()> {
    let m = 1024;
    let eps: Vec<f64> = (0..=5).map(|k| 0.25f64.powi(k)).collect();
    let table = counterexample_sweep(m, &eps)?;
    print!("{}", table.to_csv());
    println!("max relative error vs 1/sqrt(eps): {:e}", table.max_relative_error());
    Ok(())
}
