//! Command-line front end.
//!
//! Exit codes: `0` success, `1` usage or domain error, `2` numeric failure
//! (including a failed `check`), `3` I/O or parse error.

use crate::approximant::{self, write_params, Mode, TrialParams};
use crate::bloch_gb;
use crate::error::{Error, Result};
use crate::mesh_oracle::{self, MeshConfig};
use crate::rb_pt::{self, PtSeries};
use crate::resummation::{self, INTEGRAL_PRECISION};
use crate::units::{self, StateLabel, SystemSpec};
use crate::variational::{self, CsvRow, OptimizeOptions};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "bfield", version, about = "Two-body Coulomb systems in a uniform magnetic field")]
pub struct Cli {
    /// Seed of the optimizer restart noise.
    #[arg(long, global = true, default_value_t = OptimizeOptions::default().seed)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact perturbation coefficients.
    Pt {
        #[arg(long, default_value_t = 10)]
        order: usize,
        #[arg(long, default_value = "1s0")]
        state: StateLabel,
        /// Coefficient file to write; energies are printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Padé-Borel sum of a coefficient file.
    Resum {
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        /// Coefficient file; the bundled N = 100 ground-state cache by default.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// A single approximant `[L/M]` instead of the default family.
        #[arg(long, num_args = 2, value_names = ["L", "M"])]
        pade: Option<Vec<usize>>,
        /// Working precision of the Laplace integral (bits).
        #[arg(long, default_value_t = INTEGRAL_PRECISION)]
        prec: u32,
    },
    /// Variational optimum at one field.
    Opt {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Variational optima over a list of fields, as CSV.
    Scan {
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Parallel workers; continuation is disabled when above one.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV destination (stdout by default).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Field at which the variational energy vanishes.
    Critical {
        #[command(flatten)]
        solver: SolverArgs,
        /// Target `|E|` (Ry) at the returned field.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Spectral reference solver, as CSV.
    Oracle {
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long, default_value = "1s0")]
        state: StateLabel,
        #[arg(long, default_value = "inf")]
        system: SystemSpec,
        #[arg(long, default_value_t = 40)]
        nr: usize,
        #[arg(long, default_value_t = 48)]
        nu: usize,
        /// Radial scale; field-dependent default when omitted.
        #[arg(long)]
        h: Option<f64>,
        /// Minimize the energy over the radial scale first.
        #[arg(long)]
        tune: bool,
        /// Also solve the zero-energy condition instead of listing fields.
        #[arg(long)]
        critical: bool,
    },
    /// Cross-engine consistency suite; nonzero exit if anything fails.
    Check,
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    #[arg(long, default_value = "1s0")]
    pub state: StateLabel,
    #[arg(long, default_value = "inf")]
    pub system: SystemSpec,
    #[arg(long, default_value = "8")]
    pub mode: Mode,
    /// Warm-start file; the bundled file is used when omitted.
    #[arg(long)]
    pub warm: Option<PathBuf>,
    /// Ignore every warm start and begin from the seeds.
    #[arg(long, conflicts_with = "warm")]
    pub cold: bool,
    /// Short search that only refines the warm start.
    #[arg(long)]
    pub polish: bool,
    /// Fix `q` in eight-mode (1 or 0).
    #[arg(long)]
    pub q: Option<f64>,
}

impl SolverArgs {
    fn options(&self, seed: u64) -> OptimizeOptions {
        let base = if self.polish { OptimizeOptions::polish() } else { OptimizeOptions::default() };
        base.with_seed(seed)
    }

    fn warm_entries(&self) -> Result<Vec<(TrialParams, f64)>> {
        let mut entries = match (&self.warm, self.cold) {
            (_, true) => Vec::new(),
            (Some(path), _) => approximant::read_warm_starts(path)?,
            (None, _) => approximant::bundled_warm_starts()?,
        };
        if let Some(q) = self.q {
            // Only starts from the requested branch; dual branches are
            // switched off by the caller.
            entries.retain(|(p, _)| p.mode == Mode::Ten || p.q == q);
        }
        Ok(entries)
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Pt { order, state, out: path } => cmd_pt(*order, *state, path.as_deref(), out),
        Command::Resum { gamma, coeffs, pade, prec } => cmd_resum(gamma, coeffs.as_deref(), pade.as_deref(), *prec, out),
        Command::Opt { gamma, solver } => cmd_opt(*gamma, solver, cli.seed, out),
        Command::Scan { gammas, solver, jobs, out: path } => cmd_scan(gammas, solver, *jobs, cli.seed, path.as_deref(), out),
        Command::Critical { solver, tol } => cmd_critical(solver, *tol, cli.seed, out),
        Command::Oracle { gamma, state, system, nr, nu, h, tune, critical } => {
            cmd_oracle(gamma, *state, system, (*nr, *nu), *h, *tune, *critical, out)
        }
        Command::Check => cmd_check(out),
    }
}

fn cmd_pt(order: usize, state: StateLabel, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let series = rb_pt::run(state, order)?;
    match path {
        Some(p) => {
            rb_pt::export_coeffs(&series, p)?;
            writeln!(out, "wrote {} energies and {} phase corrections to {}", series.order() + 1, series.corrections.len(), p.display())?;
        }
        None => {
            for (n, e) in series.epsilons.iter().enumerate() {
                writeln!(out, "eps[{n}] = {e}")?;
            }
        }
    }
    Ok(0)
}

fn load_series(coeffs: Option<&Path>) -> Result<PtSeries> {
    match coeffs {
        Some(p) => rb_pt::import_coeffs(p),
        None => rb_pt::bundled_coeffs(StateLabel::GROUND),
    }
}

fn cmd_resum(gammas: &[f64], coeffs: Option<&Path>, pade: Option<&[usize]>, prec: u32, out: &mut dyn Write) -> Result<i32> {
    let series = load_series(coeffs)?;
    let family: Option<Vec<(usize, usize)>> = pade.map(|lm| vec![(lm[0], lm[1])]);
    if let Some(f) = &family {
        let (l, m) = f[0];
        if l + m > series.order() {
            return Err(Error::InsufficientOrder { needed: l + m, have: series.order() });
        }
    }
    writeln!(out, "gamma,energy,spread,members")?;
    for &g in gammas {
        let r = resummation::resummed_energy(g, &series, family.as_deref(), prec)?;
        let members: Vec<String> = r.members.iter().map(|(l, m, v)| format!("[{l}/{m}]={v}")).collect();
        writeln!(out, "{g},{},{:e},{}", r.energy, r.uncertainty, members.join(" "))?;
        if r.warning {
            eprintln!("warning: approximant spread {:e} at gamma = {g}; the sum is unreliable here", r.uncertainty);
        }
    }
    Ok(0)
}

fn solver_options(solver: &SolverArgs, seed: u64) -> OptimizeOptions {
    let mut opts = solver.options(seed);
    opts.fixed_q = solver.q;
    opts
}

/// Applies a fixed `q` override to the nearest warm start (or the seed).
fn warm_for(entries: &[(TrialParams, f64)], solver: &SolverArgs, lambda: f64) -> Option<TrialParams> {
    let q = solver.q.unwrap_or(1.0);
    let mut p = approximant::nearest_warm_start(entries, solver.state, solver.mode, q, lambda).map(|e| e.0);
    if p.is_none() && solver.q.is_some() {
        let mut s = TrialParams::strong_field_seed(lambda, solver.state, solver.mode);
        s.q = q;
        p = Some(s);
    }
    p
}

fn cmd_opt(gamma: f64, solver: &SolverArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let entries = solver.warm_entries()?;
    let lambda = units::to_reference_problem(gamma, &solver.system);
    let warm = warm_for(&entries, solver, lambda);
    let r = variational::optimize(gamma, solver.state, solver.mode, &solver.system, warm.as_ref(), &solver_options(solver, seed))?;
    writeln!(out, "energy = {}", r.energy)?;
    writeln!(out, "reference_energy = {}", r.reference_energy)?;
    writeln!(out, "minus_Qzz = {}", -r.q_zz)?;
    writeln!(out, "cusp = {}", r.cusp)?;
    writeln!(out, "binding = {}", r.binding)?;
    let d = &r.diagnostics;
    writeln!(out, "evaluations = {}", d.evaluations)?;
    writeln!(out, "restart_cycles = {}", d.cycles)?;
    writeln!(out, "converged = {}", d.converged)?;
    writeln!(out, "quadrature_nodes = {}", d.quadrature_nodes)?;
    writeln!(out, "quadrature_delta = {:e}", d.quadrature_delta)?;
    if let Some((p, e)) = &d.alternate_branch {
        writeln!(out, "other_branch_q = {}", p.q)?;
        writeln!(out, "other_branch_energy = {e}")?;
    }
    writeln!(out)?;
    write!(out, "{}", write_params(&r.params, r.reference_gamma))?;
    Ok(0)
}

fn write_rows(rows: &[CsvRow], path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => variational::write_csv(rows, std::fs::File::create(p)?),
        None => variational::write_csv(rows, out),
    }
}

fn cmd_scan(gammas: &[f64], solver: &SolverArgs, jobs: usize, seed: u64, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let mut entries = solver.warm_entries()?;
    if solver.q.is_some() && entries.is_empty() {
        let lambda = units::to_reference_problem(gammas[0], &solver.system);
        entries.extend(warm_for(&entries, solver, lambda).map(|p| (p, lambda)));
    }
    let rows = variational::scan(gammas, solver.state, solver.mode, &solver.system, &entries, &solver_options(solver, seed), jobs)?;
    let csv: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    write_rows(&csv, path, out)?;
    Ok(0)
}

fn cmd_critical(solver: &SolverArgs, tol: f64, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let entries = solver.warm_entries()?;
    let c = variational::critical_field(solver.state, solver.mode, &solver.system, &entries, &solver_options(solver, seed), tol)?;
    writeln!(out, "gamma_c = {}", c.gamma_c)?;
    writeln!(out, "reference_gamma_c = {}", c.reference_gamma_c)?;
    writeln!(out, "residual_energy = {}", c.residual)?;
    writeln!(out, "solves = {}", c.solves)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    gammas: &[f64],
    state: StateLabel,
    system: &SystemSpec,
    (nr, nu): (usize, usize),
    h: Option<f64>,
    tune: bool,
    critical: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    if critical {
        let g = mesh_oracle::critical_field_oracle(state, system, nr, nu, 1e-9)?;
        writeln!(out, "gamma_c = {g}")?;
        return Ok(0);
    }
    let mut rows = Vec::new();
    for &g in gammas {
        let lambda = units::to_reference_problem(g, system);
        let scale = match (h, tune) {
            (Some(h), _) => h,
            (None, true) => mesh_oracle::tune_scale(lambda, state, nr, nu)?,
            (None, false) => mesh_oracle::default_scale(state, lambda),
        };
        let r = mesh_oracle::solve(g, &MeshConfig::new(nr, nu, scale, state)?, system)?;
        let mut row = CsvRow::from(&r);
        if !system.is_infinite() {
            row.energy_inf = None;
            row.energy_finite = Some(r.energy);
        }
        rows.push(row);
    }
    variational::write_csv(&rows, out)?;
    Ok(0)
}

struct CheckLine {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn cmd_check(out: &mut dyn Write) -> Result<i32> {
    let lines = consistency_suite()?;
    writeln!(out, "{:<44} {:<6} detail", "check", "status")?;
    for l in &lines {
        writeln!(out, "{:<44} {:<6} {}", l.name, if l.pass { "PASS" } else { "FAIL" }, l.detail)?;
    }
    Ok(if lines.iter().all(|l| l.pass) { 0 } else { 2 })
}

/// Engine-against-engine comparisons that need no tabulated numbers.
fn consistency_suite() -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();

    let low = rb_pt::run(StateLabel::GROUND, 4)?;
    let residual = rb_pt::rb_residual(&low, 4)?;
    lines.push(CheckLine {
        name: "Riccati-Bloch residual through order 8",
        pass: residual.iter().all(|r| r.values().all(|c| c.cmp0().is_eq())),
        detail: format!("{} orders", residual.len()),
    });

    let series = rb_pt::bundled_coeffs(StateLabel::GROUND)?;
    let gf = bloch_gb::generating_check(0, 1, 2, &series)?;
    lines.push(CheckLine {
        name: "generating functions vs phase corrections",
        pass: gf.all_pass(),
        detail: format!("{} coefficients", gf.entries.len()),
    });

    let mut worst: f64 = 0.0;
    for g in [0.01, 0.1, 0.5, 1.0] {
        let pb = resummation::resummed_energy(g, &series, None, INTEGRAL_PRECISION)?.energy;
        let or = mesh_oracle::solve_direct(g, &MeshConfig::desk(StateLabel::GROUND, g), 1.0)?.energy;
        worst = worst.max((pb - or).abs());
    }
    lines.push(CheckLine {
        name: "oracle vs Pade-Borel, gamma <= 1",
        pass: worst < 1e-9,
        detail: format!("max |dE| = {worst:.2e}"),
    });

    let ps = mesh_oracle::solve_direct(0.7, &MeshConfig::new(24, 24, 2.0 * mesh_oracle::default_scale(StateLabel::GROUND, 2.8), StateLabel::GROUND)?, 0.5)?;
    let reference = mesh_oracle::solve_direct(2.8, &MeshConfig::new(24, 24, mesh_oracle::default_scale(StateLabel::GROUND, 2.8), StateLabel::GROUND)?, 1.0)?;
    let diff = (ps.energy - 0.5 * reference.energy).abs();
    lines.push(CheckLine {
        name: "mass scaling E_Ps(g) = E(4g)/2",
        pass: diff < 1e-12,
        detail: format!("|dE| = {diff:.2e}"),
    });

    let warm = approximant::bundled_warm_starts()?;
    let mut margin = f64::INFINITY;
    for g in [0.5, 2.0, 5.0, 10.0] {
        let Some((p, _)) = approximant::nearest_warm_start(&warm, StateLabel::GROUND, Mode::Eight, 1.0, g) else {
            continue;
        };
        let trial = approximant::Approximant { params: p, gamma: g };
        let ev = variational::functional_converged(&trial, g, 1.0, variational::DEFAULT_ORDER)?.breakdown.energy;
        let eo = mesh_oracle::solve_direct(g, &MeshConfig::desk(StateLabel::GROUND, g), 1.0)?.energy;
        margin = margin.min(ev - eo);
    }
    lines.push(CheckLine {
        name: "variational energies above oracle",
        pass: margin > -1e-9,
        detail: format!("min(E_var - E_oracle) = {margin:.2e}"),
    });

    let psi0 = approximant::ParameterFreePhase { kind: approximant::ParameterFree::Psi0, gamma: 1.0 };
    let e_psi0 = variational::functional_converged(&psi0, 1.0, 1.0, variational::DEFAULT_ORDER)?.breakdown.energy;
    let e_oracle = mesh_oracle::solve_direct(1.0, &MeshConfig::desk(StateLabel::GROUND, 1.0), 1.0)?.energy;
    lines.push(CheckLine {
        name: "parameter-free function above oracle",
        pass: e_psi0 > e_oracle,
        detail: format!("E_psi0 - E_oracle = {:.2e}", e_psi0 - e_oracle),
    });

    Ok(lines)
}
