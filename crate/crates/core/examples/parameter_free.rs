//! Energies, moments and node counts of the parameter-free trial functions
//! `Ψ₀` and `Ψ₁` over a range of fields.
//!
//! ```text
//! cargo run --release --example parameter_free -- 0.01 1 10
//! ```

use bfield_coulomb::approximant::{ParameterFree, ParameterFreePhase};
use bfield_coulomb::variational::{functional_converged, DEFAULT_ORDER};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut gammas: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if gammas.is_empty() {
        gammas = vec![0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    }
    println!("{:>8} {:>22} {:>22} {:>10} {:>8}", "gamma", "E(Psi0)", "E(Psi1)", "-Qzz(Psi0)", "nodes");
    for g in gammas {
        let t0 = Instant::now();
        let c0 = functional_converged(&ParameterFreePhase { kind: ParameterFree::Psi0, gamma: g }, g, 1.0, DEFAULT_ORDER)?;
        let c1 = functional_converged(&ParameterFreePhase { kind: ParameterFree::Psi1, gamma: g }, g, 1.0, DEFAULT_ORDER)?;
        println!(
            "{g:>8} {:>22.12} {:>22.12} {:>10.6} {:>8}  ({:.1} ms)",
            c0.breakdown.energy,
            c1.breakdown.energy,
            -c0.moments.q_zz(),
            c0.nodes,
            t0.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
