//! Discrete laboratory for input-output stability of linear systems.
//!
//! Infinite-dimensional examples (transport and shift semigroups on `[0, 1]`)
//! are realized exactly on a grid with `dt = Δξ`, and finite-dimensional
//! systems through their convolution kernels. On top of that the crate
//! estimates `L^∞ → L^∞` (BIBO) and `L^1 → L^1` (LILO) gains as certified
//! brackets and checks how those gains transform under passing to the dual
//! system.
//!
//! - [`signal`]: sampled signals, `L^p` norms, the time-reversed pairing.
//! - [`kernel`]: matrix measures, total variation, convolution, Laplace.
//! - [`sysnode`]: discrete system nodes, duals, impulse responses.
//! - [`opnorm`]: induced norms between weighted spaces, gain certificates.
//! - [`stability`]: gain brackets, the band counterexample, admissibility.
//! - [`duality`]: pairing identity and dual-gain checks.
//! - [`experiment`]: batch commands behind the `iostab` binary.

pub mod error;
pub mod linalg;
pub mod signal;
pub mod kernel;
pub mod sysnode;
pub mod opnorm;
pub mod stability;
pub mod duality;
pub mod experiment;

pub use error::{Error, Result};
pub use kernel::{GainValue, MatrixMeasure};
pub use signal::{lp_norm, pairing, u_epsilon, Lp, NormKind, Signal, TimeGrid, ValueSpace};
pub use sysnode::{DiscreteSystemNode, SimulationResult};
pub use stability::{AdmissibilityReport, GainReport, Strategy, UpperBound};
pub use duality::{DualityReport, Verdict};
