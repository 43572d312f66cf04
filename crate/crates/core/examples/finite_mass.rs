//! Hydrogen and positronium energies at one field by both finite-mass
//! routes: scaling the static-nucleus optimum, and optimizing the reduced
//! mass Hamiltonian directly.
//!
//! ```text
//! cargo run --release --example finite_mass -- 1.0
//! ```

use bfield_coulomb::approximant::{bundled_warm_starts, nearest_warm_start, Mode};
use bfield_coulomb::units::{self, StateLabel, SystemSpec};
use bfield_coulomb::variational::{optimize, optimize_direct, OptimizeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gamma: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let warm = bundled_warm_starts()?;
    let opts = OptimizeOptions::polish();
    println!("{:<12} {:>10} {:>20} {:>20} {:>10}", "system", "mu", "E scaled (Ry)", "E direct (Ry)", "rel diff");
    for (name, system) in [("hydrogen", SystemSpec::hydrogen()), ("positronium", SystemSpec::positronium())] {
        let lambda = units::to_reference_problem(gamma, &system);
        let start = nearest_warm_start(&warm, StateLabel::GROUND, Mode::Eight, 1.0, lambda).map(|e| e.0);
        let scaled = optimize(gamma, StateLabel::GROUND, Mode::Eight, &system, start.as_ref(), &opts)?;
        let (direct, _) = optimize_direct(gamma, StateLabel::GROUND, Mode::Eight, &system, Some(&scaled.params), &opts)?;
        println!(
            "{name:<12} {:>10.7} {:>20.12} {:>20.12} {:>10.1e}",
            system.mu_ratio(),
            scaled.energy,
            direct,
            ((direct - scaled.energy) / scaled.energy).abs()
        );
    }
    Ok(())
}
