//! The band inputs themselves: support, L∞(L²) norm and the left-shift
//! output they produce.

use iostab::sysnode::left_shift_distributed_input;
use iostab::{u_epsilon, Lp, TimeGrid};

fn main() -> iostab::Result<()> {
    let m = 16;
    let grid = TimeGrid::new(1.0 / m as f64, m + 1)?;
    let sys = left_shift_distributed_input(m)?;
    for eps in [1.0, 0.25, 0.0625] {
        let u = u_epsilon(grid, m, eps)?;
        let y = sys.respond(&u)?;
        println!("eps = {eps}: ‖u‖ = {}, ‖y‖ = {}, y(1) = {}", u.lp_norm(Lp::Inf), y.lp_norm(Lp::Inf), y.value(m)[0]);
        for k in [0, m / 2, m] {
            let row: String = u.value(k).iter().map(|&v| if v != 0.0 { '#' } else { '.' }).collect();
            println!("  t = {:5.3}  {row}", grid.time(k));
        }
    }
    Ok(())
}
