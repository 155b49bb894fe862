//! Observation and control admissibility constants, with the
//! maximal-regularity bracket next to the observation one.

use iostab::stability::{control_admissibility, observation_admissibility, ControlFlavor, DEFAULT_SEED};
use iostab::sysnode::{catalogue_system, CATALOGUE};

fn main() -> iostab::Result<()> {
    let m = 32;
    for name in CATALOGUE {
        let sys = catalogue_system(name, m)?;
        let horizon = sys.default_horizon()?;
        let obs = observation_admissibility(&sys, horizon, 32, DEFAULT_SEED)?;
        let ctl = control_admissibility(&sys, ControlFlavor::C, horizon, 32, DEFAULT_SEED)?;
        println!(
            "{name:10} observation [{:.4}, {:.4}]  max-regularity [{:.4}, {:.4}]  control [{:.4}, {:.4}]",
            obs.constant_lower,
            obs.constant_upper,
            obs.max_regularity_lower.unwrap_or(f64::NAN),
            obs.max_regularity_upper.unwrap_or(f64::NAN),
            ctl.constant_lower,
            ctl.constant_upper
        );
    }
    Ok(())
}
