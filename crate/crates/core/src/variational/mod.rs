//! Rayleigh-Ritz energies of the approximant, their optimization and the
//! derived observables.
//!
//! The functional works in the direct reduced-mass form
//! `(1/μ̃)(−Δ) − 2/r + γ²ρ²/(4μ̃)` (electron Rydbergs), which reduces to the
//! reference problem for `μ̃ = 1`. The production path for finite masses is
//! the scaling map of [`crate::units`]; the direct form is kept as an
//! independent cross-check.

mod quadrature;
mod simplex;

pub use quadrature::{Extent, QuadNode, QuadratureGrid};
pub use simplex::{minimize, SimplexOutcome};

use crate::approximant::{self, Approximant, Mode, TrialParams, TrialPhase};
use crate::error::{Error, Result};
use crate::units::{self, StateLabel, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Default Gauss points per panel.
pub const DEFAULT_ORDER: usize = 10;
/// Relative change allowed between a grid and its doubled version.
pub const GATE_TOLERANCE: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 3;
const CHUNK: usize = 2048;
/// Largest tolerated rise of `ln ψ²` above its value at the nucleus; more
/// signals a phase that decreases without bound.
const MAX_LOG_GROWTH: f64 = 200.0;

/// Unnormalized integrals of the Hamiltonian pieces and `norm = ∫ψ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub coulomb: f64,
    pub diamagnetic: f64,
    pub norm: f64,
    pub energy: f64,
}

/// Normalized second moments from the same grid as the energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub r2: f64,
    pub z2: f64,
}

impl Moments {
    pub fn q_zz(&self) -> f64 {
        self.r2 - 3.0 * self.z2
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

#[derive(Clone, Copy, Default)]
struct Partial {
    grad: Sum,
    inv_r: Sum,
    rho2: Sum,
    norm: Sum,
    r2: Sum,
    z2: Sum,
}

impl Partial {
    fn merge(&mut self, o: &Partial) {
        self.grad.add(o.grad.value());
        self.inv_r.add(o.inv_r.value());
        self.rho2.add(o.rho2.value());
        self.norm.add(o.norm.value());
        self.r2.add(o.r2.value());
        self.z2.add(o.z2.value());
    }
}

fn accumulate(trial: &dyn TrialPhase, nodes: &[QuadNode], shift: f64) -> Result<Partial> {
    let odd = trial.state().p == 1;
    let mut acc = Partial::default();
    for n in nodes {
        let ph = trial.phase(n.rho, n.r)?;
        let log_density = -2.0 * (ph.phase - shift);
        if log_density > MAX_LOG_GROWTH {
            return Err(Error::InvalidParams(format!("density grows by e^{log_density:.0} away from the nucleus")));
        }
        let e = log_density.exp();
        if e == 0.0 {
            continue;
        }
        // Gradient of the phase in (ρ, z) from its (ρ, r) chart.
        let g_rho = ph.d_rho + ph.d_r * n.rho / n.r;
        let g_z = ph.d_r * n.z / n.r;
        let (psi2, grad2) = if odd {
            let z2 = n.z * n.z;
            let gz = 1.0 - n.z * g_z;
            (z2 * e, e * (z2 * g_rho * g_rho + gz * gz))
        } else {
            (e, e * (g_rho * g_rho + g_z * g_z))
        };
        let w = n.weight;
        acc.grad.add(w * grad2);
        acc.inv_r.add(w * psi2 / n.r);
        acc.rho2.add(w * psi2 * n.rho * n.rho);
        acc.norm.add(w * psi2);
        acc.r2.add(w * psi2 * n.r * n.r);
        acc.z2.add(w * psi2 * n.z * n.z);
    }
    if !acc.norm.value().is_finite() || !acc.grad.value().is_finite() {
        return Err(Error::Numeric("non-finite integrand".into()));
    }
    Ok(acc)
}

/// Sums over fixed chunks so the result does not depend on the thread count.
fn integrate(trial: &dyn TrialPhase, grid: &QuadratureGrid) -> Result<Partial> {
    // The phase at the nucleus is subtracted to keep `e^{−2Φ}` in range.
    let shift = trial.phase(0.0, 0.0)?.phase;
    let chunks: Vec<&[QuadNode]> = grid.nodes.chunks(CHUNK).collect();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(chunks.len());
    let partials: Vec<Result<Partial>> = if threads <= 1 {
        chunks.iter().map(|c| accumulate(trial, c, shift)).collect()
    } else {
        let mut slots: Vec<Option<Result<Partial>>> = (0..chunks.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let chunks = &chunks;
                    s.spawn(move || {
                        (t..chunks.len()).step_by(threads).map(|i| (i, accumulate(trial, chunks[i], shift))).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("quadrature worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every chunk evaluated")).collect()
    };
    let mut total = Partial::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

fn breakdown(acc: &Partial, gamma: f64, mu_ratio: f64) -> EnergyBreakdown {
    let kinetic = acc.grad.value() / mu_ratio;
    let coulomb = -2.0 * acc.inv_r.value();
    let diamagnetic = gamma * gamma / (4.0 * mu_ratio) * acc.rho2.value();
    let norm = acc.norm.value();
    EnergyBreakdown { kinetic, coulomb, diamagnetic, norm, energy: (kinetic + coulomb + diamagnetic) / norm }
}

fn moments(acc: &Partial) -> Moments {
    let n = acc.norm.value();
    Moments { r2: acc.r2.value() / n, z2: acc.z2.value() / n }
}

/// Energy expectation value of `trial` on a fixed grid.
pub fn functional(trial: &dyn TrialPhase, gamma: f64, mu_ratio: f64, grid: &QuadratureGrid) -> Result<EnergyBreakdown> {
    if !(mu_ratio > 0.0) {
        return Err(Error::Domain(format!("reduced mass ratio must be positive, got {mu_ratio}")));
    }
    Ok(breakdown(&integrate(trial, grid)?, gamma, mu_ratio))
}

/// Energy and moments that passed the doubling gate.
#[derive(Clone, Copy, Debug)]
pub struct Converged {
    pub breakdown: EnergyBreakdown,
    pub moments: Moments,
    /// Largest relative change of energy or moments under the final doubling.
    pub delta: f64,
    /// Gauss points per panel of the accepted (finer) grid.
    pub order: usize,
    pub nodes: usize,
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Evaluates on a grid adapted to `trial` and on the grid with doubled
/// Gauss order; doubles again (at most three times) until the relative
/// change drops below [`GATE_TOLERANCE`].
pub fn functional_converged(trial: &dyn TrialPhase, gamma: f64, mu_ratio: f64, order: usize) -> Result<Converged> {
    let extent = Extent::of_trial(trial, gamma);
    let mut coarse_grid = QuadratureGrid::new(extent, order);
    let mut coarse = integrate(trial, &coarse_grid)?;
    let mut delta = f64::INFINITY;
    for _ in 0..=MAX_DOUBLINGS {
        let fine_grid = coarse_grid.doubled(extent);
        let fine = integrate(trial, &fine_grid)?;
        let (bc, bf) = (breakdown(&coarse, gamma, mu_ratio), breakdown(&fine, gamma, mu_ratio));
        let (mc, mf) = (moments(&coarse), moments(&fine));
        delta = relative(bc.energy, bf.energy).max(relative(mc.r2, mf.r2)).max(relative(mc.z2, mf.z2));
        if delta < GATE_TOLERANCE {
            return Ok(Converged { breakdown: bf, moments: mf, delta, order: fine_grid.order, nodes: fine_grid.nodes.len() });
        }
        coarse_grid = fine_grid;
        coarse = fine;
    }
    Err(Error::Quadrature { delta })
}

/// Quadrupole moment, second moments, cusp and binding energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub q_zz: f64,
    pub r2: f64,
    pub z2: f64,
    pub cusp: f64,
    pub binding: f64,
}

/// Observables of the approximant with `params` in the direct reduced-mass
/// form. Lengths are in Bohr radii, the cusp is the phase slope at the
/// nucleus divided by `μ̃` (so the exact value is one for every mass).
pub fn observables(params: &TrialParams, gamma: f64, mu_ratio: f64) -> Result<Observables> {
    let trial = Approximant { params: params.clone(), gamma };
    let c = functional_converged(&trial, gamma, mu_ratio, DEFAULT_ORDER)?;
    Ok(Observables {
        q_zz: c.moments.q_zz(),
        r2: c.moments.r2,
        z2: c.moments.z2,
        cusp: approximant::cusp(params) / mu_ratio,
        binding: units::binding_energy(c.breakdown.energy, gamma),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub quadrature_nodes: usize,
    pub quadrature_order: usize,
    pub quadrature_delta: f64,
    /// Energy evaluations spent by the simplex searches.
    pub evaluations: usize,
    /// Completed restart cycles.
    pub cycles: usize,
    /// Whether the last restart cycle improved by less than the tolerance.
    pub converged: bool,
    /// Parameters and reference energy of the losing `q` branch, when both
    /// were run.
    pub alternate_branch: Option<(TrialParams, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub gamma: f64,
    pub system: SystemSpec,
    pub state: StateLabel,
    /// Energy of the requested system (Ry).
    pub energy: f64,
    /// Field and energy of the equivalent static-nucleus problem.
    pub reference_gamma: f64,
    pub reference_energy: f64,
    /// Infinite-mass energy at the same `gamma`, filled by [`scan`] for
    /// finite-mass systems so tables can show both columns.
    pub energy_infinite: Option<f64>,
    /// Optimal parameters of the reference problem.
    pub params: TrialParams,
    pub q_zz: f64,
    pub r2: f64,
    pub z2: f64,
    pub cusp: f64,
    pub binding: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    /// Random restarts per cycle.
    pub restarts: usize,
    /// Upper bound on restart cycles.
    pub max_cycles: usize,
    pub seed: u64,
    /// Evaluation budget of the first simplex run and of each restart.
    pub first_evals: usize,
    pub restart_evals: usize,
    /// Gauss points per panel during the search.
    pub order: usize,
    /// Stop once a full cycle improves the energy by less than this (Ry).
    pub cycle_tolerance: f64,
    /// Reference fields at or above this run both `q` branches (ground
    /// state, eight-mode).
    pub dual_branch_above: f64,
    /// Number of candidate starts (best first) that get a full search.
    pub searched_starts: usize,
    /// Run only this `q` branch (eight-mode), overriding the dual-branch rule.
    pub fixed_q: Option<f64>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            restarts: 5,
            max_cycles: 6,
            seed: 20_240_601,
            first_evals: 6000,
            restart_evals: 3000,
            order: DEFAULT_ORDER,
            cycle_tolerance: 1e-10,
            dual_branch_above: 5000.0,
            searched_starts: 2,
            fixed_q: None,
        }
    }
}

impl OptimizeOptions {
    /// A short search meant to refine a good warm start.
    pub fn polish() -> Self {
        OptimizeOptions {
            restarts: 2,
            max_cycles: 2,
            first_evals: 2500,
            restart_evals: 1200,
            searched_starts: 1,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

struct Search {
    params: TrialParams,
    energy: f64,
    evaluations: usize,
    cycles: usize,
    converged: bool,
}

fn energy_on(params: &TrialParams, gamma: f64, mu_ratio: f64, grid: &QuadratureGrid) -> f64 {
    if !params.admissible() {
        return f64::INFINITY;
    }
    let trial = Approximant { params: params.clone(), gamma };
    match functional(&trial, gamma, mu_ratio, grid) {
        Ok(b) if b.energy.is_finite() && b.norm > 0.0 => b.energy,
        _ => f64::INFINITY,
    }
}

fn grid_for(params: &TrialParams, gamma: f64, order: usize) -> QuadratureGrid {
    QuadratureGrid::for_trial(&Approximant { params: params.clone(), gamma }, gamma, order)
}

/// Step floor for parameters that sit at zero.
fn floor_step(i: usize, mode: Mode) -> f64 {
    match (mode, i) {
        (_, 0..=4) => 0.02,
        (Mode::Eight, _) => 0.01,
        (Mode::Ten, 5) => 0.02,
        (Mode::Ten, 9) => 0.05,
        (Mode::Ten, _) => 0.01,
    }
}

fn simplex_run(start: &TrialParams, gamma: f64, mu_ratio: f64, opts: &OptimizeOptions, evals: usize) -> (TrialParams, f64, usize) {
    let grid = grid_for(start, gamma, opts.order);
    let x0 = start.free_vector();
    let steps: Vec<f64> = x0.iter().enumerate().map(|(i, v)| (0.1 * v.abs()).max(floor_step(i, start.mode))).collect();
    let e0 = energy_on(start, gamma, mu_ratio, &grid);
    let ftol = 1e-13 * e0.abs().max(1.0);
    let out = minimize(|x| energy_on(&start.with_free_vector(x), gamma, mu_ratio, &grid), &x0, &steps, ftol, evals);
    (start.with_free_vector(&out.x), out.f, out.evaluations)
}

fn perturb(p: &TrialParams, rng: &mut ChaCha8Rng) -> TrialParams {
    let x: Vec<f64> = p
        .free_vector()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut y = v * (1.0 + rng.gen_range(-0.1..0.1));
            if v.abs() < 1e-3 {
                y += 0.5 * floor_step(i, p.mode) * rng.gen_range(-1.0..1.0);
            }
            y
        })
        .collect();
    let mut q = p.with_free_vector(&x);
    for b in q.beta[1..].iter_mut() {
        *b = b.abs();
    }
    q
}

fn rng_for(seed: u64, gamma: f64, state: StateLabel, q: f64) -> ChaCha8Rng {
    let tag = gamma.to_bits() ^ (q.to_bits().rotate_left(7)) ^ ((state.p as u64) << 61) ^ ((state.m as i64 as u64) << 53);
    ChaCha8Rng::seed_from_u64(seed ^ tag.rotate_left(17))
}

/// Simplex search with seeded restart cycles around the incumbent.
fn search(start: TrialParams, gamma: f64, mu_ratio: f64, opts: &OptimizeOptions) -> Result<Search> {
    let mut rng = rng_for(opts.seed, gamma, start.state, start.q);
    let (mut best, mut best_e, mut evaluations) = simplex_run(&start, gamma, mu_ratio, opts, opts.first_evals);
    if !best_e.is_finite() {
        return Err(Error::Infeasible(format!("no admissible parameters near the start at gamma = {gamma}")));
    }
    let mut cycles = 0;
    let mut converged = false;
    while cycles < opts.max_cycles {
        let before = best_e;
        for _ in 0..opts.restarts {
            let trial = perturb(&best, &mut rng);
            let (p, e, n) = simplex_run(&trial, gamma, mu_ratio, opts, opts.restart_evals);
            evaluations += n;
            if e < best_e {
                // Re-evaluate on the incumbent's own grid before accepting.
                let e_own = energy_on(&p, gamma, mu_ratio, &grid_for(&p, gamma, opts.order));
                if e_own < best_e {
                    best = p;
                    best_e = e_own;
                }
            }
        }
        cycles += 1;
        if before - best_e < opts.cycle_tolerance {
            converged = true;
            break;
        }
    }
    Ok(Search { params: best, energy: best_e, evaluations, cycles, converged })
}

/// Admissible candidates ordered by their starting energy.
fn ranked_starts(candidates: Vec<TrialParams>, gamma: f64, mu_ratio: f64, order: usize) -> Result<Vec<TrialParams>> {
    let mut scored: Vec<(TrialParams, f64)> = candidates
        .into_iter()
        .filter(|p| p.admissible())
        .map(|p| {
            let e = energy_on(&p, gamma, mu_ratio, &grid_for(&p, gamma, order));
            (p, e)
        })
        .filter(|(_, e)| e.is_finite())
        .collect();
    if scored.is_empty() {
        return Err(Error::Infeasible(format!("every starting point is inadmissible at gamma = {gamma}")));
    }
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(scored.into_iter().map(|(p, _)| p).collect())
}

/// Full searches from the `opts.searched_starts` best candidates; the lowest
/// final energy wins. A start that is lower at the outset often sits in a
/// worse basin, so more than one is worth following when time allows.
fn search_from(candidates: Vec<TrialParams>, gamma: f64, mu_ratio: f64, opts: &OptimizeOptions) -> Result<Search> {
    let ranked = ranked_starts(candidates, gamma, mu_ratio, opts.order)?;
    let mut best: Option<Search> = None;
    let mut evaluations = 0;
    for start in ranked.into_iter().take(opts.searched_starts.max(1)) {
        let s = search(start, gamma, mu_ratio, opts)?;
        evaluations += s.evaluations;
        if best.as_ref().map_or(true, |b| s.energy < b.energy) {
            best = Some(s);
        }
    }
    let mut best = best.expect("at least one start searched");
    best.evaluations = evaluations;
    Ok(best)
}

fn default_candidates(gamma: f64, state: StateLabel, mode: Mode, q: f64, warm: &[TrialParams]) -> Vec<TrialParams> {
    let mut seed = TrialParams::semiclassical_seed(gamma, state, mode);
    seed.q = q;
    let mut c: Vec<TrialParams> = warm
        .iter()
        .filter(|p| p.state == state)
        .map(|p| {
            let mut p = p.clone();
            p.mode = mode;
            if mode == Mode::Eight {
                p.beta[0] = 0.0;
                p.q = q;
            }
            p
        })
        .collect();
    c.push(seed);
    let mut strong = TrialParams::strong_field_seed(gamma, state, mode);
    strong.q = q;
    c.push(strong);
    c
}

/// Optimizes the reference problem at field `lambda` from the best of the
/// candidate starting points.
fn optimize_reference(
    lambda: f64,
    state: StateLabel,
    mode: Mode,
    warm: &[TrialParams],
    opts: &OptimizeOptions,
) -> Result<(Search, Option<(TrialParams, f64)>)> {
    if lambda == 0.0 {
        let p = TrialParams::coulomb(state, mode);
        let e = energy_on(&p, 0.0, 1.0, &grid_for(&p, 0.0, opts.order));
        return Ok((Search { params: p, energy: e, evaluations: 1, cycles: 0, converged: true }, None));
    }
    let run_branch = |q: f64| -> Result<Search> {
        search_from(default_candidates(lambda, state, mode, q, warm), lambda, 1.0, opts)
    };
    if let Some(q) = opts.fixed_q {
        return Ok((run_branch(q)?, None));
    }
    let dual = mode == Mode::Eight && state == StateLabel::GROUND && lambda >= opts.dual_branch_above;
    if !dual {
        return Ok((run_branch(1.0)?, None));
    }
    let a = run_branch(1.0)?;
    let b = run_branch(0.0)?;
    Ok(if b.energy < a.energy { (b, Some((a.params, a.energy))) } else { (a, Some((b.params, b.energy))) })
}

fn finish(gamma: f64, system: &SystemSpec, lambda: f64, s: Search, alternate: Option<(TrialParams, f64)>) -> Result<SolveResult> {
    let trial = Approximant { params: s.params.clone(), gamma: lambda };
    let c = functional_converged(&trial, lambda, 1.0, DEFAULT_ORDER)?;
    let energy_ref = c.breakdown.energy;
    let energy = units::energy_from_reference(energy_ref, system);
    let r2 = units::quadrupole_from_reference(c.moments.r2, system);
    let z2 = units::quadrupole_from_reference(c.moments.z2, system);
    Ok(SolveResult {
        gamma,
        system: *system,
        state: s.params.state,
        energy,
        reference_gamma: lambda,
        reference_energy: energy_ref,
        energy_infinite: None,
        cusp: approximant::cusp(&s.params),
        params: s.params,
        q_zz: r2 - 3.0 * z2,
        r2,
        z2,
        binding: units::binding_energy(energy, gamma),
        diagnostics: Diagnostics {
            quadrature_nodes: c.nodes,
            quadrature_order: c.order,
            quadrature_delta: c.delta,
            evaluations: s.evaluations,
            cycles: s.cycles,
            converged: s.converged,
            alternate_branch: alternate,
        },
    })
}

/// Minimizes the variational energy at field `gamma` for `system`, solving
/// the equivalent static-nucleus problem and scaling back.
///
/// `warm` is a parameter set of the reference problem; the semiclassical
/// seed is always considered as well and the lower-energy start wins.
pub fn optimize(
    gamma: f64,
    state: StateLabel,
    mode: Mode,
    system: &SystemSpec,
    warm: Option<&TrialParams>,
    opts: &OptimizeOptions,
) -> Result<SolveResult> {
    let warm: Vec<TrialParams> = warm.into_iter().cloned().collect();
    optimize_from(gamma, state, mode, system, &warm, opts)
}

/// Like [`optimize`] with any number of reference-problem starting points.
/// For the strong-field ground state pass one start per `q` branch.
pub fn optimize_from(
    gamma: f64,
    state: StateLabel,
    mode: Mode,
    system: &SystemSpec,
    starts: &[TrialParams],
    opts: &OptimizeOptions,
) -> Result<SolveResult> {
    check_field(gamma)?;
    let lambda = units::to_reference_problem(gamma, system);
    let (s, alt) = optimize_reference(lambda, state, mode, starts, opts)?;
    finish(gamma, system, lambda, s, alt)
}

fn check_field(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("field strength must be finite and non-negative, got {gamma}")));
    }
    Ok(())
}

/// Maps reference-problem parameters at `γ/μ̃²` onto the direct
/// reduced-mass functional at `γ` (`r → μ̃r`). Exact for eight-mode.
pub fn scale_params(p: &TrialParams, mu_ratio: f64) -> TrialParams {
    let mut s = p.clone();
    let m = mu_ratio;
    s.alpha[1] *= m;
    s.alpha[2] *= m * m;
    s.alpha[4] *= m;
    s.beta[1] *= m;
    s.beta[2] *= m * m;
    s.beta[3] *= m * m;
    s
}

/// Direct finite-mass optimization, used only to cross-check the scaling
/// path. Returns the energy (Ry) and the optimal direct-form parameters.
pub fn optimize_direct(
    gamma: f64,
    state: StateLabel,
    mode: Mode,
    system: &SystemSpec,
    warm: Option<&TrialParams>,
    opts: &OptimizeOptions,
) -> Result<(f64, TrialParams)> {
    check_field(gamma)?;
    let mu = system.mu_ratio();
    let mut candidates: Vec<TrialParams> = warm.map(|p| scale_params(p, mu)).into_iter().collect();
    let mut seed = TrialParams::semiclassical_seed(gamma / (mu * mu), state, mode);
    seed = scale_params(&seed, mu);
    candidates.push(seed);
    let s = search_from(candidates, gamma, mu, opts)?;
    let trial = Approximant { params: s.params.clone(), gamma };
    let c = functional_converged(&trial, gamma, mu, DEFAULT_ORDER)?;
    Ok((c.breakdown.energy, s.params))
}

/// Nearest stored optimum of each `q` branch. Ten-mode also starts from the
/// eight-mode optima, which are points of its larger family.
fn warm_candidates(warm: &[(TrialParams, f64)], state: StateLabel, mode: Mode, lambda: f64) -> Vec<TrialParams> {
    let modes: &[Mode] = if mode == Mode::Ten { &[Mode::Ten, Mode::Eight] } else { &[Mode::Eight] };
    let mut out = Vec::new();
    for &m in modes {
        for q in [1.0, 0.0] {
            if m == Mode::Ten && q == 0.0 {
                continue;
            }
            if let Some((mut p, _)) = approximant::nearest_warm_start(warm, state, m, q, lambda) {
                p.mode = mode;
                out.push(p);
            }
        }
    }
    out
}

/// Solves a list of fields.
///
/// With `jobs <= 1` the points are visited in order and every point also
/// tries the previous optimum as a start (continuation). With `jobs > 1`
/// the points are split over threads and each starts only from `warm`
/// and the semiclassical seed, so results may differ in the last digits
/// from a sequential scan.
pub fn scan(
    gammas: &[f64],
    state: StateLabel,
    mode: Mode,
    system: &SystemSpec,
    warm: &[(TrialParams, f64)],
    opts: &OptimizeOptions,
    jobs: usize,
) -> Result<Vec<SolveResult>> {
    let point = |gamma: f64, previous: Option<&TrialParams>| -> Result<SolveResult> {
        check_field(gamma)?;
        let lambda = units::to_reference_problem(gamma, system);
        let mut starts = warm_candidates(warm, state, mode, lambda);
        starts.extend(previous.cloned());
        let (s, alt) = optimize_reference(lambda, state, mode, &starts, opts)?;
        let mut r = finish(gamma, system, lambda, s, alt)?;
        if !system.is_infinite() {
            let mut inf_starts = warm_candidates(warm, state, mode, gamma);
            inf_starts.push(r.params.clone());
            let (si, alti) = optimize_reference(gamma, state, mode, &inf_starts, opts)?;
            r.energy_infinite = Some(finish(gamma, &SystemSpec::infinite(), gamma, si, alti)?.energy);
        }
        Ok(r)
    };
    if jobs <= 1 || gammas.len() <= 1 {
        let mut out: Vec<SolveResult> = Vec::with_capacity(gammas.len());
        for &g in gammas {
            let prev = out.last().map(|r| r.params.clone());
            out.push(point(g, prev.as_ref())?);
        }
        return Ok(out);
    }
    let jobs = jobs.min(gammas.len());
    let mut slots: Vec<Option<Result<SolveResult>>> = (0..gammas.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|t| {
                let point = &point;
                s.spawn(move || (t..gammas.len()).step_by(jobs).map(|i| (i, point(gammas[i], None))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("scan worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every field solved")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalField {
    /// Critical field of the requested system.
    pub gamma_c: f64,
    /// Critical field of the static-nucleus problem.
    pub reference_gamma_c: f64,
    /// Reference energy at the returned field (Ry).
    pub residual: f64,
    /// Energy minimizations performed.
    pub solves: usize,
}

/// Search interval for the zero of `E(γ)` on the reference problem.
pub fn critical_bracket(state: StateLabel) -> (f64, f64) {
    if state.p == 1 {
        (0.05, 2.0)
    } else {
        (0.01, 10.0)
    }
}

/// Finds `γ_c` with `E(γ_c) = 0` by Illinois regula falsi on optimized
/// energies to `|E| < tolerance` and maps it onto `system`.
pub fn critical_field(
    state: StateLabel,
    mode: Mode,
    system: &SystemSpec,
    warm: &[(TrialParams, f64)],
    opts: &OptimizeOptions,
    tolerance: f64,
) -> Result<CriticalField> {
    let mut solved: Vec<(TrialParams, f64)> = Vec::new();
    let mut solves = 0;
    let mut energy_at = |g: f64, solved: &mut Vec<(TrialParams, f64)>| -> Result<f64> {
        let mut starts: Vec<TrialParams> = Vec::new();
        if let Some((p, _)) = approximant::nearest_warm_start(warm, state, mode, 1.0, g) {
            starts.push(p);
        }
        if let Some((p, _)) = approximant::nearest_warm_start(solved, state, mode, 1.0, g) {
            starts.push(p);
        }
        let (s, _) = optimize_reference(g, state, mode, &starts, opts)?;
        solves += 1;
        let c = functional_converged(&Approximant { params: s.params.clone(), gamma: g }, g, 1.0, DEFAULT_ORDER)?;
        solved.push((s.params, g));
        Ok(c.breakdown.energy)
    };
    let (mut a, mut b) = critical_bracket(state);
    let (lo, hi) = (a, b);
    let mut fa = energy_at(a, &mut solved)?;
    let mut fb = energy_at(b, &mut solved)?;
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    let mut side = 0i8;
    let (mut g, mut fg) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..60 {
        if fg.abs() < tolerance {
            break;
        }
        g = (a * fb - b * fa) / (fb - fa);
        fg = energy_at(g, &mut solved)?;
        if fg.signum() == fb.signum() {
            b = g;
            fb = fg;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = g;
            fa = fg;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if fg.abs() >= tolerance {
        return Err(Error::Numeric(format!("critical field search stalled at |E| = {:e}", fg.abs())));
    }
    Ok(CriticalField { gamma_c: units::critical_field_scaled(g, system), reference_gamma_c: g, residual: fg, solves })
}

/// One row of the results table shared by the variational solver and the
/// mesh oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub gamma: f64,
    pub energy_inf: Option<f64>,
    pub energy_finite: Option<f64>,
    pub minus_qzz: f64,
    pub cusp: f64,
    pub binding: f64,
    pub iterations: usize,
}

impl From<&SolveResult> for CsvRow {
    fn from(r: &SolveResult) -> Self {
        let (energy_inf, energy_finite) =
            if r.system.is_infinite() { (Some(r.energy), None) } else { (r.energy_infinite, Some(r.energy)) };
        CsvRow {
            gamma: r.gamma,
            energy_inf,
            energy_finite,
            minus_qzz: -r.q_zz,
            cusp: r.cusp,
            binding: r.binding,
            iterations: r.diagnostics.evaluations,
        }
    }
}

pub const CSV_HEADER: [&str; 7] = ["gamma", "energy_inf", "energy_finite", "minus_Qzz", "cusp", "binding", "iterations"];

/// Writes rows with the shortest round-trip representation of every value;
/// missing values are empty fields.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(CSV_HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.gamma.to_string(),
            opt(r.energy_inf),
            opt(r.energy_finite),
            r.minus_qzz.to_string(),
            r.cusp.to_string(),
            r.binding.to_string(),
            r.iterations.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximant::{ParameterFree, ParameterFreePhase};

    #[test]
    fn coulomb_ground_state_is_exact() {
        let p = TrialParams::coulomb(StateLabel::GROUND, Mode::Eight);
        let c = functional_converged(&Approximant { params: p.clone(), gamma: 0.0 }, 0.0, 1.0, DEFAULT_ORDER).unwrap();
        assert!((c.breakdown.energy + 1.0).abs() < 1e-12, "{}", c.breakdown.energy);
        assert!(c.moments.q_zz().abs() < 1e-12);
    }

    #[test]
    fn coulomb_2p0_moments() {
        let p = TrialParams::coulomb(StateLabel::TWO_P0, Mode::Eight);
        let c = functional_converged(&Approximant { params: p, gamma: 0.0 }, 0.0, 1.0, DEFAULT_ORDER).unwrap();
        assert!((c.breakdown.energy + 0.25).abs() < 1e-12);
        assert!((c.moments.r2 - 30.0).abs() < 1e-9 && (c.moments.z2 - 18.0).abs() < 1e-9);
    }

    #[test]
    fn breakdown_signs() {
        let p = TrialParams::semiclassical_seed(1.0, StateLabel::GROUND, Mode::Eight);
        let c = functional_converged(&Approximant { params: p, gamma: 1.0 }, 1.0, 1.0, DEFAULT_ORDER).unwrap();
        let b = c.breakdown;
        assert!(b.kinetic > 0.0 && b.coulomb < 0.0 && b.diamagnetic >= 0.0);
        assert!(((b.kinetic + b.coulomb + b.diamagnetic) / b.norm - b.energy).abs() < 1e-15);
    }

    #[test]
    fn psi0_energy_at_unit_field() {
        let t = ParameterFreePhase { kind: ParameterFree::Psi0, gamma: 1.0 };
        let c = functional_converged(&t, 1.0, 1.0, DEFAULT_ORDER).unwrap();
        assert!((c.breakdown.energy + 0.65965707).abs() < 5e-9, "{}", c.breakdown.energy);
    }

    #[test]
    fn csv_layout() {
        let row = CsvRow { gamma: 1.0, energy_inf: Some(-0.5), energy_finite: None, minus_qzz: 0.25, cusp: 1.0, binding: 1.5, iterations: 7 };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "gamma,energy_inf,energy_finite,minus_Qzz,cusp,binding,iterations\n1,-0.5,,0.25,1,1.5,7\n");
    }
}
