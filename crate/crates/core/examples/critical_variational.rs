//! Critical field (zero of the energy) of the approximant for the ground
//! state and the 2p0 state, and the positronium value by mass scaling.
//!
//! ```text
//! cargo run --release --example critical_variational
//! ```

use bfield_coulomb::approximant::{bundled_warm_starts, Mode};
use bfield_coulomb::units::{critical_field_scaled, StateLabel, SystemSpec};
use bfield_coulomb::variational::{critical_field, OptimizeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let warm = bundled_warm_starts()?;
    let opts = OptimizeOptions::polish();
    for state in [StateLabel::GROUND, StateLabel::TWO_P0] {
        let c = critical_field(state, Mode::Eight, &SystemSpec::infinite(), &warm, &opts, 1e-9)?;
        println!("{}: gamma_c = {:.9} (|E| = {:.1e}, {} solves)", state.name(), c.gamma_c, c.residual.abs(), c.solves);
        if state == StateLabel::GROUND {
            println!("Ps : gamma_c = {:.9}", critical_field_scaled(c.reference_gamma_c, &SystemSpec::positronium()));
        }
    }
    Ok(())
}
