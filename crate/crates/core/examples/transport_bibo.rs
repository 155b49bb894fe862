//! Boundary-controlled transport: the state never exceeds the input bound,
//! so the L∞ gain bracket is [1, 1] at every resolution.

use iostab::stability::{empirical_gain, Strategy, DEFAULT_SEED};
use iostab::sysnode::transport_boundary_control;
use iostab::Lp;

fn main() -> iostab::Result<()> {
    for m in [16, 64, 256] {
        let sys = transport_boundary_control(m)?;
        let strategies = [Strategy::GreedyAlignment, Strategy::RandomProbe { count: 50, seed: DEFAULT_SEED }];
        let inf = empirical_gain(&sys, Lp::Inf, 3 * m, &strategies)?;
        let one = empirical_gain(&sys, Lp::One, 3 * m, &strategies)?;
        println!(
            "M = {m:4}: L∞ gain in [{}, {}], L¹ gain in [{:.4}, {:.4}]",
            inf.lower_bound,
            inf.upper_bound.value(),
            one.lower_bound,
            one.upper_bound.value()
        );
    }
    Ok(())
}
