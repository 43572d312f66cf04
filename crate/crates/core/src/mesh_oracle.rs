//! Spectral reference solver for the `m = 0` problem in `(r, u = cos θ)`.
//!
//! The wavefunction is expanded as `ψ = Σ c_{kl} φ_k(r/h) P̃_l(u)` with
//! orthonormal Laguerre functions `φ_k(x) ∝ L_k^{(2)}(x) e^{−x/2}` (orthogonal
//! under `x² dx`) and normalized Legendre polynomials of one parity. The
//! overlap matrix is then the identity and the Hamiltonian
//!
//! ```text
//! H = (1/μ̃)[T ⊗ 1 + U ⊗ l(l+1)] − 2 C ⊗ 1 + (γ²/4μ̃) R₂ ⊗ (1 − u²)
//! ```
//!
//! is block tridiagonal in `l`. Radial matrix elements are integrated with
//! composite Gauss-Legendre rules (exact up to rounding); the angular ones are
//! closed-form. The lowest eigenvalue is a rigorous upper bound that
//! converges exponentially in the radial count for fields up to a few a.u.

use crate::error::{Error, Result};
use crate::units::{self, StateLabel, SystemSpec};
use crate::variational::CsvRow;
use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Basis sizes and radial scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshConfig {
    /// Radial functions.
    pub n_r: usize,
    /// Angular functions of the state's parity.
    pub n_u: usize,
    /// Radial scale length (Bohr); the basis decays like `e^{−r/2h}`.
    pub h: f64,
    pub state: StateLabel,
}

/// Default radial scale: `e^{−r/2h}` matches the field-free decay for weak
/// fields and tightens logarithmically as the field squeezes the state.
pub fn default_scale(state: StateLabel, gamma: f64) -> f64 {
    let h0 = 0.5 * state.principal() as f64;
    h0 / (1.0 + 0.25 * (1.0 + gamma).ln())
}

impl MeshConfig {
    pub fn new(n_r: usize, n_u: usize, h: f64, state: StateLabel) -> Result<Self> {
        if n_r < 4 || n_u < 4 {
            return Err(Error::Domain(format!("basis counts must be at least 4, got n_r = {n_r}, n_u = {n_u}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("radial scale must be positive, got {h}")));
        }
        if state.m != 0 || state.p > 1 {
            return Err(Error::Unsupported(format!("mesh oracle handles m = 0, p in {{0, 1}}, got {}", state.name())));
        }
        Ok(MeshConfig { n_r, n_u, h, state })
    }

    /// The desk-scale configuration `N_r = 40`, `N_u = 48`.
    pub fn desk(state: StateLabel, gamma: f64) -> Self {
        MeshConfig { n_r: 40, n_u: 48, h: default_scale(state, gamma), state }
    }

    pub fn dimension(&self) -> usize {
        self.n_r * self.n_u
    }

    fn l_values(&self) -> Vec<usize> {
        (0..self.n_u).map(|i| self.state.p as usize + 2 * i).collect()
    }
}

/// Radial matrices in the dimensionless variable `x = r/h`, already scaled
/// by the powers of `h` that make the overlap the identity.
struct Radial {
    kinetic: DMatrix<f64>,
    centrifugal: DMatrix<f64>,
    coulomb: DMatrix<f64>,
    r2: DMatrix<f64>,
}

/// Orthonormal Laguerre functions and their derivatives at `x`.
fn laguerre_functions(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    // L_k^{(2)} and L_k^{(3)} by the three-term recurrence; L' = −L_{k−1}^{(3)}.
    let mut l2 = vec![0.0; n];
    let mut l3 = vec![0.0; n];
    for (alpha, out) in [(2.0, &mut l2), (3.0, &mut l3)] {
        out[0] = 1.0;
        if n > 1 {
            out[1] = 1.0 + alpha - x;
        }
        for k in 1..n.saturating_sub(1) {
            let kf = k as f64;
            out[k + 1] = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        }
    }
    let decay = (-0.5 * x).exp();
    let mut f = vec![0.0; n];
    let mut df = vec![0.0; n];
    for k in 0..n {
        let norm = norm_factor(k);
        let deriv = if k == 0 { 0.0 } else { -l3[k - 1] };
        f[k] = norm * l2[k] * decay;
        df[k] = norm * (deriv - 0.5 * l2[k]) * decay;
    }
    (f, df)
}

/// `√(k!/(k+2)!)`.
fn norm_factor(k: usize) -> f64 {
    let k = k as f64;
    1.0 / ((k + 1.0) * (k + 2.0)).sqrt()
}

fn radial_matrices(n: usize, h: f64) -> Radial {
    // Beyond x_max every product of two basis functions is below 1e-20 of
    // its peak; panels of width 2 with 24 points integrate polynomial-times-
    // exponential integrands to rounding.
    let x_max = 4.0 * n as f64 + 100.0;
    let panels = (x_max / 2.0).ceil() as usize;
    let rule = GaussLegendre::new(24).expect("valid order");
    let mut t = DMatrix::zeros(n, n);
    let mut u = DMatrix::zeros(n, n);
    let mut c = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    for p in 0..panels {
        let (a, b) = (2.0 * p as f64, 2.0 * (p + 1) as f64);
        for (xi, wi) in rule.iter() {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let w = 0.5 * (b - a) * wi;
            let (f, df) = laguerre_functions(n, x);
            let x2 = x * x;
            for i in 0..n {
                for j in 0..=i {
                    let ff = w * f[i] * f[j];
                    t[(i, j)] += w * df[i] * df[j] * x2;
                    u[(i, j)] += ff;
                    c[(i, j)] += ff * x;
                    d[(i, j)] += ff * x2 * x2;
                }
            }
        }
    }
    for m in [&mut t, &mut u, &mut c, &mut d] {
        m.fill_upper_triangle_with_lower_triangle();
    }
    Radial { kinetic: t / (h * h), centrifugal: u / (h * h), coulomb: c / h, r2: d * (h * h) }
}

/// `⟨P̃_l | u² | P̃_l'⟩` for normalized Legendre polynomials.
fn u2_element(l: usize, lp: usize) -> f64 {
    let a = |l: usize| if l == 0 { 0.0 } else { l as f64 / (((2 * l - 1) * (2 * l + 1)) as f64).sqrt() };
    if l == lp {
        a(l + 1).powi(2) + a(l).powi(2)
    } else if lp == l + 2 {
        a(l + 1) * a(l + 2)
    } else if l == lp + 2 {
        a(lp + 1) * a(lp + 2)
    } else {
        0.0
    }
}

struct Operators {
    hamiltonian: DMatrix<f64>,
    r2: DMatrix<f64>,
    z2: DMatrix<f64>,
}

fn assemble(config: &MeshConfig, gamma: f64, mu_ratio: f64) -> Operators {
    let rad = radial_matrices(config.n_r, config.h);
    let ls = config.l_values();
    let (nr, dim) = (config.n_r, config.dimension());
    let mut h = DMatrix::zeros(dim, dim);
    let mut r2 = DMatrix::zeros(dim, dim);
    let mut z2 = DMatrix::zeros(dim, dim);
    let dia = gamma * gamma / (4.0 * mu_ratio);
    for (bi, &l) in ls.iter().enumerate() {
        for (bj, &lp) in ls.iter().enumerate() {
            let u2 = u2_element(l, lp);
            let same = bi == bj;
            if !same && u2 == 0.0 {
                continue;
            }
            let one_minus = if same { 1.0 - u2 } else { -u2 };
            for i in 0..nr {
                for j in 0..nr {
                    let d = rad.r2[(i, j)];
                    let mut v = dia * one_minus * d;
                    if same {
                        v += (rad.kinetic[(i, j)] + (l * (l + 1)) as f64 * rad.centrifugal[(i, j)]) / mu_ratio
                            - 2.0 * rad.coulomb[(i, j)];
                        r2[(bi * nr + i, bj * nr + j)] = d;
                    }
                    h[(bi * nr + i, bj * nr + j)] = v;
                    z2[(bi * nr + i, bj * nr + j)] = u2 * d;
                }
            }
        }
    }
    Operators { hamiltonian: h, r2, z2 }
}

/// Lowest state of one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub gamma: f64,
    pub state: StateLabel,
    /// Energy (Ry) of the requested system.
    pub energy: f64,
    pub r2: f64,
    pub z2: f64,
    pub q_zz: f64,
    /// Phase slope at the nucleus, `−g'(0)/g(0)` with `g = R_p(r)/r^p` the
    /// lowest partial wave; `1` (ground) and `1/2` (odd) for the exact
    /// field-free states.
    pub cusp: f64,
    pub binding: f64,
    pub config: MeshConfig,
    /// `|E(N) − E(N')|` against a basis with three quarters of the
    /// functions in each direction, when requested.
    pub estimated_error: Option<f64>,
}

impl From<&OracleResult> for CsvRow {
    fn from(r: &OracleResult) -> Self {
        CsvRow {
            gamma: r.gamma,
            energy_inf: Some(r.energy),
            energy_finite: None,
            minus_qzz: -r.q_zz,
            cusp: r.cusp,
            binding: r.binding,
            iterations: r.config.dimension(),
        }
    }
}

/// Value and first two derivatives at `x = 0` of the orthonormal functions.
fn origin_values(n: usize) -> Vec<[f64; 3]> {
    let binom = |top: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64) };
    (0..n)
        .map(|k| {
            // L_k^{(α)}(0) = C(k+α, k); derivatives shift (k, α) → (k−1, α+1).
            let l0 = binom(k + 2, k);
            let l1 = if k >= 1 { -binom(k + 2, k - 1) } else { 0.0 };
            let l2 = if k >= 2 { binom(k + 2, k - 2) } else { 0.0 };
            let nk = norm_factor(k);
            [nk * l0, nk * (l1 - 0.5 * l0), nk * (l2 - l1 + 0.25 * l0)]
        })
        .collect()
}

/// Bases up to this size use a full symmetric eigendecomposition.
const DENSE_LIMIT: usize = 600;

fn lowest_dense(h: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let (i, e) = eig
        .eigenvalues
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Numeric("empty spectrum".into()))?;
    Ok((e, eig.eigenvectors.column(i).into_owned()))
}

/// Shifted inverse iteration. `upper` bounds the lowest eigenvalue from
/// above (a smaller nested basis); the shift is lowered until `H − σ`
/// admits a Cholesky factor, which proves `σ` lies below the spectrum, so
/// the iteration converges to the lowest state.
fn lowest_inverse_iteration(h: &DMatrix<f64>, upper: f64) -> Result<DVector<f64>> {
    let n = h.nrows();
    let mut offset = 1e-3 * (1.0 + upper.abs());
    let chol = loop {
        let sigma = upper - offset;
        let shifted = h - DMatrix::identity(n, n) * sigma;
        if let Some(c) = shifted.cholesky() {
            break c;
        }
        offset *= 4.0;
        if offset > 1e6 * (1.0 + upper.abs()) {
            return Err(Error::Numeric("no shift below the spectrum found".into()));
        }
    };
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut last = f64::INFINITY;
    for _ in 0..500 {
        let mut w = chol.solve(&v);
        w /= w.norm();
        let rq = w.dot(&(h * &w));
        v = w;
        if (rq - last).abs() <= 1e-15 * (1.0 + rq.abs()) {
            return Ok(v);
        }
        last = rq;
    }
    Err(Error::Numeric("inverse iteration did not converge".into()))
}

/// Lowest eigenpair of `H` in the given basis, in the direct reduced-mass
/// form (`μ̃ = 1` is the static-nucleus problem).
pub fn solve_direct(gamma: f64, config: &MeshConfig, mu_ratio: f64) -> Result<OracleResult> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("field strength must be finite and non-negative, got {gamma}")));
    }
    let config = MeshConfig::new(config.n_r, config.n_u, config.h, config.state)?;
    let ops = assemble(&config, gamma, mu_ratio);
    let c = if config.dimension() <= DENSE_LIMIT {
        lowest_dense(&ops.hamiltonian)?.1
    } else {
        let small = MeshConfig { n_r: config.n_r.min(16), n_u: config.n_u.min(12), ..config };
        let upper = lowest_dense(&assemble(&small, gamma, mu_ratio).hamiltonian)?.0;
        lowest_inverse_iteration(&ops.hamiltonian, upper)?
    };
    // The Rayleigh quotient is insensitive to first-order eigenvector
    // errors, unlike the eigenvalue returned by the solver whose absolute
    // error scales with the largest (centrifugal) entries.
    let energy = c.dot(&(&ops.hamiltonian * &c)) / c.dot(&c);
    let r2 = c.dot(&(&ops.r2 * &c));
    let z2 = c.dot(&(&ops.z2 * &c));
    // Lowest partial wave near the nucleus; the basis is in x = r/h.
    let origin = origin_values(config.n_r);
    let mut d = [0.0; 3];
    for k in 0..config.n_r {
        for (acc, v) in d.iter_mut().zip(origin[k]) {
            *acc += c[k] * v;
        }
    }
    let cusp = if config.state.p == 0 { -d[1] / d[0] / config.h } else { -d[2] / (2.0 * d[1]) / config.h };
    Ok(OracleResult {
        gamma,
        state: config.state,
        energy,
        r2,
        z2,
        q_zz: r2 - 3.0 * z2,
        cusp: cusp / mu_ratio,
        binding: units::binding_energy(energy, gamma),
        config,
        estimated_error: None,
    })
}

/// Solves `system` through the static-nucleus problem at the scaled field.
/// The radial scale in `config` refers to the static-nucleus problem.
pub fn solve(gamma: f64, config: &MeshConfig, system: &SystemSpec) -> Result<OracleResult> {
    let lambda = units::to_reference_problem(gamma, system);
    let mut r = solve_direct(lambda, config, 1.0)?;
    r.gamma = gamma;
    r.energy = units::energy_from_reference(r.energy, system);
    r.r2 = units::quadrupole_from_reference(r.r2, system);
    r.z2 = units::quadrupole_from_reference(r.z2, system);
    r.q_zz = r.r2 - 3.0 * r.z2;
    r.binding = units::binding_energy(r.energy, gamma);
    Ok(r)
}

/// [`solve`] plus a convergence estimate from a smaller basis; warns
/// through `estimated_error` only, the caller decides what is acceptable.
pub fn solve_with_estimate(gamma: f64, config: &MeshConfig, system: &SystemSpec) -> Result<OracleResult> {
    let mut r = solve(gamma, config, system)?;
    let small = MeshConfig { n_r: (3 * config.n_r / 4).max(4), n_u: (3 * config.n_u / 4).max(4), ..*config };
    r.estimated_error = Some((solve(gamma, &small, system)?.energy - r.energy).abs());
    Ok(r)
}

/// Minimizes the lowest eigenvalue over `ln h` by golden-section search
/// in `[h₀/3, 3h₀]` around the default scale.
pub fn tune_scale(gamma: f64, state: StateLabel, n_r: usize, n_u: usize) -> Result<f64> {
    let h0 = default_scale(state, gamma);
    let energy = |lh: f64| -> Result<f64> { Ok(solve_direct(gamma, &MeshConfig::new(n_r, n_u, lh.exp(), state)?, 1.0)?.energy) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((h0 / 3.0).ln(), (3.0 * h0).ln());
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (energy(x1)?, energy(x2)?);
    for _ in 0..16 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = energy(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = energy(x2)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Zero of the lowest eigenvalue of the static-nucleus problem by Newton
/// iteration with the Hellmann-Feynman slope `dE/dγ = (γ/2)⟨ρ²⟩`, mapped
/// onto `system`. The basis is fixed along the iteration.
pub fn critical_field_oracle(
    state: StateLabel,
    system: &SystemSpec,
    n_r: usize,
    n_u: usize,
    tolerance: f64,
) -> Result<f64> {
    let (lo, hi) = crate::variational::critical_bracket(state);
    let mut g = if state.p == 0 { 2.0 } else { 0.4 };
    let config = MeshConfig::new(n_r, n_u, default_scale(state, g), state)?;
    for _ in 0..50 {
        let r = solve_direct(g, &config, 1.0)?;
        if r.energy.abs() < tolerance {
            return Ok(units::critical_field_scaled(g, system));
        }
        let slope = 0.5 * g * (r.r2 - r.z2);
        let next = g - r.energy / slope;
        if !(next > lo && next < hi) {
            return Err(Error::Bracket { lo, hi });
        }
        g = next;
    }
    Err(Error::Numeric("Newton iteration for the critical field did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_basis_is_orthonormal() {
        let n = 12;
        let rule = GaussLegendre::new(24).unwrap();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for p in 0..80 {
            let (a, b) = (2.0 * p as f64, 2.0 * (p + 1) as f64);
            for (xi, wi) in rule.iter() {
                let x = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let (f, _) = laguerre_functions(n, x);
                for i in 0..n {
                    for j in 0..n {
                        s[(i, j)] += 0.5 * (b - a) * wi * f[i] * f[j] * x * x;
                    }
                }
            }
        }
        assert!((s - DMatrix::identity(n, n)).amax() < 1e-13);
    }

    #[test]
    fn angular_moments() {
        // ⟨P̃₀|u²|P̃₀⟩ = 1/3, ⟨P̃₁|u²|P̃₁⟩ = 3/5.
        assert!((u2_element(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((u2_element(1, 1) - 0.6).abs() < 1e-15);
        assert_eq!(u2_element(0, 4), 0.0);
    }

    #[test]
    fn field_free_levels() {
        let g = solve_direct(0.0, &MeshConfig::new(12, 4, 0.5, StateLabel::GROUND).unwrap(), 1.0).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12, "{}", g.energy);
        assert!((g.cusp - 1.0).abs() < 1e-10);
        let e = solve_direct(0.0, &MeshConfig::new(12, 4, 1.0, StateLabel::TWO_P0).unwrap(), 1.0).unwrap();
        assert!((e.energy + 0.25).abs() < 1e-12, "{}", e.energy);
        assert!((e.q_zz + 24.0).abs() < 1e-9, "{}", e.q_zz);
    }
}
