//! Optimizes the approximant at one field and prints energy, observables,
//! the optimal parameters and optimizer diagnostics.
//!
//! ```text
//! cargo run --release --example optimize -- 1 1s0 8 inf [warm_starts.txt]
//! ```

use bfield_coulomb::approximant::{self, write_params, Mode};
use bfield_coulomb::units::{StateLabel, SystemSpec};
use bfield_coulomb::variational::{optimize, OptimizeOptions};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gamma: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let state: StateLabel = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(StateLabel::GROUND);
    let mode: Mode = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(Mode::Eight);
    let system: SystemSpec = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or_else(SystemSpec::infinite);
    let (warm, opts) = match args.get(4) {
        Some(path) => {
            let entries = approximant::read_warm_starts(path.as_ref())?;
            let lambda = bfield_coulomb::units::to_reference_problem(gamma, &system);
            (approximant::nearest_warm_start(&entries, state, mode, 1.0, lambda).map(|e| e.0), OptimizeOptions::polish())
        }
        None => (None, OptimizeOptions::default()),
    };
    let t0 = Instant::now();
    let r = optimize(gamma, state, mode, &system, warm.as_ref(), &opts)?;
    println!("energy      {:.12}", r.energy);
    println!("reference   {:.12} at gamma {}", r.reference_energy, r.reference_gamma);
    println!("-Qzz        {:.8}", -r.q_zz);
    println!("cusp        {:.8}", r.cusp);
    println!("binding     {:.12}", r.binding);
    println!("diagnostics {:?}", r.diagnostics);
    println!("time        {:.1} s", t0.elapsed().as_secs_f64());
    print!("{}", write_params(&r.params, r.reference_gamma));
    Ok(())
}
