//! Regenerates the warm-start file by continuation scans over the tabulated
//! fields (and the reference fields needed by positronium), writing every
//! optimum, including the losing `q` branch at the strongest fields.
//!
//! ```text
//! cargo run --release --example warm_starts -- data/warm_starts.txt [1s0] [2p0] [ten]
//! ```
//!
//! With job names only those scans are redone. Their old entries are
//! dropped first; entries of the other jobs are kept, and the eight-mode
//! optima serve as starting points for the ten-mode scan.

use bfield_coulomb::approximant::{read_warm_starts, write_warm_starts, Mode, TrialParams};
use bfield_coulomb::units::{StateLabel, SystemSpec};
use bfield_coulomb::variational::{scan, OptimizeOptions};
use std::time::Instant;

const TABLE: [f64; 11] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 500.0, 1000.0, 10000.0];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "data/warm_starts.txt".into());
    let mut selected: Vec<String> = args.collect();
    if selected.is_empty() {
        selected = vec!["1s0".into(), "2p0".into(), "ten".into()];
    }
    let opts = OptimizeOptions { searched_starts: 3, ..OptimizeOptions::default() };
    let mut ground: Vec<f64> = TABLE.iter().flat_map(|&g| [g, 4.0 * g]).collect();
    ground.push(2.065212);
    let mut excited: Vec<f64> = TABLE.to_vec();
    excited.push(0.436663);
    let jobs: [(&str, StateLabel, Mode, Vec<f64>); 3] = [
        ("1s0", StateLabel::GROUND, Mode::Eight, ground),
        ("2p0", StateLabel::TWO_P0, Mode::Eight, excited),
        ("ten", StateLabel::GROUND, Mode::Ten, vec![1.0, 500.0, 10000.0]),
    ];
    let mut entries: Vec<(TrialParams, f64)> = read_warm_starts(out.as_ref()).unwrap_or_default();
    for (name, state, mode, mut gammas) in jobs {
        if !selected.iter().any(|s| s == name) {
            continue;
        }
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        let t0 = Instant::now();
        entries.retain(|(p, _)| !(p.state == state && p.mode == mode));
        let up = scan(&gammas, state, mode, &SystemSpec::infinite(), &entries, &opts, 1)?;
        // A downward sweep, continuing from the optimum at the next stronger
        // field; basins found at strong fields often extend to weaker ones.
        let mut seeded = entries.clone();
        seeded.extend(up.iter().map(|r| (r.params.clone(), r.gamma)));
        gammas.reverse();
        let mut down = scan(&gammas, state, mode, &SystemSpec::infinite(), &seeded, &opts, 1)?;
        down.reverse();
        let rows: Vec<_> = up.into_iter().zip(down).map(|(a, b)| if b.energy < a.energy { b } else { a }).collect();
        for r in rows {
            eprintln!(
                "{} mode {:?} gamma {:<9} E {:.12} -Qzz {:.7} cusp {:.6} evals {} ({:.0} s)",
                state.name(),
                mode,
                r.gamma,
                r.energy,
                -r.q_zz,
                r.cusp,
                r.diagnostics.evaluations,
                t0.elapsed().as_secs_f64()
            );
            if let Some((p, e)) = &r.diagnostics.alternate_branch {
                eprintln!("    other branch q = {} E {:.12}", p.q, e);
                entries.push((p.clone(), r.gamma));
            }
            entries.push((r.params, r.gamma));
        }
        std::fs::write(&out, write_warm_starts(&entries))?;
    }
    Ok(())
}
