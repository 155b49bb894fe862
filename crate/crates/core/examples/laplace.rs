//! Laplace transforms of catalogue kernels against their closed forms and
//! against the transfer function of the shift realization.

use iostab::kernel::{catalogue_kernel, closed_form_laplace};
use iostab::DiscreteSystemNode;
use num_complex::Complex64;

fn main() -> iostab::Result<()> {
    let dt = 1e-3;
    let points = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, 3.0), Complex64::new(4.0, -2.0)];
    for name in ["delay1", "exp1"] {
        let h = catalogue_kernel(name, dt)?;
        let real = DiscreteSystemNode::from_kernel(&h, dt)?;
        for s in points {
            let g = h.laplace(s)[(0, 0)];
            let exact = closed_form_laplace(name, s)?[(0, 0)];
            let t = real.transfer(s)?[(0, 0)];
            println!(
                "{name:7} s = {s:8}: L(h) = {g:.6}  closed form = {exact:.6}  realization - L(h) = {:.1e}",
                (t - g).norm()
            );
        }
    }
    Ok(())
}
