//! Scans a list of fields from the bundled warm starts and writes the
//! results table as CSV on stdout (one row per field).
//!
//! ```text
//! cargo run --release --example scan_table -- 2p0 0.1 1 10
//! ```

use bfield_coulomb::approximant::{bundled_warm_starts, Mode};
use bfield_coulomb::units::{StateLabel, SystemSpec};
use bfield_coulomb::variational::{scan, write_csv, CsvRow, OptimizeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let state: StateLabel = args.next().map(|s| s.parse()).transpose()?.unwrap_or(StateLabel::GROUND);
    let mut gammas: Vec<f64> = args.map(|s| s.parse()).collect::<Result<_, _>>()?;
    if gammas.is_empty() {
        gammas = vec![0.1, 1.0, 10.0];
    }
    let warm = bundled_warm_starts()?;
    let rows = scan(&gammas, state, Mode::Eight, &SystemSpec::infinite(), &warm, &OptimizeOptions::polish(), 1)?;
    let csv: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    write_csv(&csv, std::io::stdout().lock())?;
    Ok(())
}
