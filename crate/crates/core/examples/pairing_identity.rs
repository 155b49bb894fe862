//! Time-reversed pairing between a system and its weighted adjoint.

use iostab::duality::pairing_identity_check;
use iostab::sysnode::{catalogue_system, random_system, CATALOGUE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> iostab::Result<()> {
    for name in CATALOGUE {
        let sys = catalogue_system(name, 64)?;
        println!("{name:10} residual {:e}", pairing_identity_check(&sys, 100, 192, 1)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..5 {
        let sys = random_system(&mut rng, 6, 3, 2, 0.05, 0.9)?;
        println!("random-{i}   residual {:e}", pairing_identity_check(&sys, 100, 120, i)?);
    }
    Ok(())
}
