//! Mesh-oracle energies and observables at one field for a sequence of basis
//! sizes, showing the convergence towards the exact eigenvalue.
//!
//! ```text
//! cargo run --release --example oracle -- 1 1s0 [h]
//! ```

use bfield_coulomb::mesh_oracle::{default_scale, solve_direct, MeshConfig};
use bfield_coulomb::units::StateLabel;
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gamma: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let state: StateLabel = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(StateLabel::GROUND);
    let h: f64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or_else(|| default_scale(state, gamma));
    println!("{:>4} {:>4} {:>24} {:>12} {:>12} {:>8}", "N_r", "N_u", "energy", "-Qzz", "cusp", "secs");
    for (nr, nu) in [(16, 16), (24, 24), (32, 32), (40, 48)] {
        let t0 = Instant::now();
        let r = solve_direct(gamma, &MeshConfig::new(nr, nu, h, state)?, 1.0)?;
        println!("{nr:>4} {nu:>4} {:>24.16} {:>12.8} {:>12.8} {:>8.2}", r.energy, -r.q_zz, r.cusp, t0.elapsed().as_secs_f64());
    }
    Ok(())
}
