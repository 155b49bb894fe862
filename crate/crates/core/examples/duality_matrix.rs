//! Primal and dual gains of the whole catalogue under grid refinement, as a
//! markdown table. The left shift shows up as L¹-bounded but L∞-divergent.

use iostab::duality::duality_matrix;
use iostab::stability::DEFAULT_SEED;
use iostab::sysnode::CATALOGUE;

fn main() -> iostab::Result<()> {
    let fig = duality_matrix(&CATALOGUE, &[8, 16, 32, 64], 50, DEFAULT_SEED)?;
    print!("{}", fig.markdown());
    for cell in fig.growth.iter().filter(|c| c.divergent) {
        println!("{} {} p = {}: lower bounds {:?}", cell.system, cell.side, cell.p.as_str(), cell.lower_bounds);
    }
    let failures = fig.failures();
    println!("failed checks: {}", failures.len());
    Ok(())
}
