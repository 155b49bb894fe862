//! Closed-form gains of convolution kernels and the sign-aligned witness
//! that attains them.

use iostab::kernel::{catalogue_kernel, KERNEL_CATALOGUE};
use iostab::stability::kernel_gain;
use iostab::{DiscreteSystemNode, Lp};

fn main() -> iostab::Result<()> {
    let dt = 0.01;
    for name in KERNEL_CATALOGUE {
        let h = catalogue_kernel(name, dt)?;
        let sys = DiscreteSystemNode::from_kernel(&h, dt)?;
        let horizon = h.max_lag(dt)? + 1;
        for p in [Lp::Inf, Lp::One] {
            let rep = kernel_gain(&sys, p, horizon)?;
            println!(
                "{name:10} p = {:3}: TV gain {:.6}, realized {:.6}, witness replays to {:.6}",
                p.as_str(),
                h.induced_gain(p).value,
                rep.lower_bound,
                rep.replay(&sys)?
            );
        }
        println!("{name:10} TV matrix {}", h.tv_matrix());
    }
    Ok(())
}
