//! Exact perturbative energies to high order.
//!
//! `cargo run --release --example pt_series -- [N] [out.json] [1s0|2p0]`

use bfield_coulomb::rb_pt::{export_coeffs, large_order_estimate, run};
use bfield_coulomb::units::StateLabel;
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let start = Instant::now();
    let state: StateLabel = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(StateLabel::GROUND);
    let series = run(state, n)?;
    println!("computed epsilon_0..epsilon_{n} in {:.2?}", start.elapsed());
    for (k, e) in series.epsilons.iter().enumerate().take(11) {
        println!("eps_{k:<3} = {e}");
    }
    if state != StateLabel::GROUND {
        if let Some(path) = args.get(2) {
            export_coeffs(&series, path.as_ref())?;
            println!("wrote {path}");
        }
        return Ok(());
    }
    println!("\n  n   eps_n              leading asymptotics   with 1/n correction");
    for k in (10..=n).step_by(10) {
        let e = series.epsilon_f64(k);
        let lead = large_order_estimate(k as u32, false);
        let sub = large_order_estimate(k as u32, true);
        println!("{k:>4}  {e:<+18.4e} {:<+8.5}             {:<+8.6}", e / lead, e / sub);
    }
    if let Some(path) = args.get(2) {
        export_coeffs(&series, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
