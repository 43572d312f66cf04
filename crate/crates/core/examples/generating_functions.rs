//! Compares the closed-form generating functions of the weak-field phase
//! with the coefficients produced by exact perturbation theory.
//!
//! ```text
//! cargo run --release --example generating_functions
//! ```

use bfield_coulomb::bloch_gb::generating_check;
use bfield_coulomb::rb_pt::run;
use bfield_coulomb::units::StateLabel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ground = run(StateLabel::GROUND, 7)?;
    let odd = run(StateLabel::TWO_P0, 6)?;
    for (state, k, n, j_max) in [(&ground, 0, 0, 6), (&ground, 0, 1, 4), (&ground, 1, 1, 4), (&odd, 0, 0, 6)] {
        let report = generating_check(k, n, j_max, state)?;
        for e in &report.entries {
            println!(
                "{} {}_{}^({}) u^{}: {:<28} {}",
                state.state.name(),
                e.family,
                e.k,
                e.n,
                2 * e.j,
                e.closed_form.to_string(),
                if e.passes() { "ok" } else { "MISMATCH" }
            );
        }
    }
    Ok(())
}
