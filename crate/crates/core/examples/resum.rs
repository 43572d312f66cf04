//! Padé-Borel resummation of the perturbative ground-state energy.
//!
//! `cargo run --release --example resum -- [coeffs.json] [gamma ...]`

use bfield_coulomb::rb_pt::{import_coeffs, run};
use bfield_coulomb::resummation::{optimal_truncation, resummed_energy, INTEGRAL_PRECISION};
use bfield_coulomb::units::StateLabel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (series, rest) = match args.first() {
        Some(p) if p.ends_with(".json") => (import_coeffs(p.as_ref())?, &args[1..]),
        _ => (run(StateLabel::GROUND, 100)?, &args[..]),
    };
    let gammas: Vec<f64> = if rest.is_empty() {
        vec![0.01, 0.1, 0.5, 1.0, 2.0, 10.0]
    } else {
        rest.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    println!("state {} with {} coefficients", series.state, series.order() + 1);
    for g in gammas {
        let r = resummed_energy(g, &series, None, INTEGRAL_PRECISION)?;
        println!(
            "gamma = {g:<6} E = {:.14} +- {:.1e}{}   (optimal truncation {:.12})",
            r.energy,
            r.uncertainty,
            if r.warning { "  [unreliable]" } else { "" },
            optimal_truncation(g, &series)
        );
        for (l, m, v) in &r.members {
            println!("    [{l}/{m}] {v:.15}");
        }
    }
    Ok(())
}
