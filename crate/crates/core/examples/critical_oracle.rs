//! Critical fields of the mesh oracle for both states and for positronium
//! by scaling.
//!
//! ```text
//! cargo run --release --example critical_oracle
//! ```

use bfield_coulomb::mesh_oracle::critical_field_oracle;
use bfield_coulomb::units::{StateLabel, SystemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (state, system, label) in [
        (StateLabel::GROUND, SystemSpec::infinite(), "1s0, static nucleus"),
        (StateLabel::TWO_P0, SystemSpec::infinite(), "2p0, static nucleus"),
        (StateLabel::GROUND, SystemSpec::positronium(), "1s0, positronium"),
        (StateLabel::GROUND, SystemSpec::hydrogen(), "1s0, hydrogen"),
    ] {
        let g = critical_field_oracle(state, &system, 40, 48, 1e-12)?;
        println!("{label:<22} gamma_c = {g:.10}");
    }
    Ok(())
}
