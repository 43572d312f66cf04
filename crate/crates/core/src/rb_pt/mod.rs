//! Exact perturbation theory in `λ²` for the phase `Φ = -log ψ` in the
//! variables `s = ρ`, `t = r` (Bohr units).
//!
//! Two recursions are implemented. The phase recursion produces the
//! polynomial corrections `Φₙ` together with `εₙ`; its cost grows like `n⁵`
//! so it is run only to moderate order. The wavefunction recursion
//! ([`linear`]) produces `εₙ` alone in `O(n³)` per order and is evaluated
//! modulo many primes, which makes `N = 100` a matter of seconds. Whenever
//! both are available the energies are compared exactly.

mod arith;
pub mod io;
mod linear;
mod operator;
mod phase;

use crate::error::{Error, Result};
use crate::units::StateLabel;
use operator::{Grid, OperatorShape};
use rug::{Float, Integer, Rational};
use std::collections::BTreeMap;

pub use io::{bundled_coeffs, export_coeffs, import_coeffs, FORMAT_VERSION};

/// Default number of phase corrections computed by [`run`].
pub const DEFAULT_PHASE_ORDERS: usize = 12;

/// Bivariate polynomial in `(s, t)` with exact rational coefficients,
/// keyed by `(s-exponent, t-exponent)`. All `s`-exponents are even.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhasePolynomial {
    pub terms: BTreeMap<(u32, u32), Rational>,
}

impl PhasePolynomial {
    pub fn coeff(&self, s_exp: u32, t_exp: u32) -> Rational {
        self.terms.get(&(s_exp, t_exp)).cloned().unwrap_or_default()
    }

    /// `a_{j,k}^{(n)}`: coefficient of `t · s^{2(n-k)} t^{2(k-j)}`.
    pub fn a_coeff(&self, n: u32, j: u32, k: u32) -> Rational {
        if k > n || j > k {
            return Rational::new();
        }
        self.coeff(2 * (n - k), 2 * (k - j) + 1)
    }

    /// `b_{j,k}^{(n)}`: coefficient of `s^{2(n-k)} t^{2(k-j)}`.
    pub fn b_coeff(&self, n: u32, j: u32, k: u32) -> Rational {
        if k > n || j > k {
            return Rational::new();
        }
        self.coeff(2 * (n - k), 2 * (k - j))
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c.to_f64() * s.powi(i as i32) * t.powi(j as i32))
            .sum()
    }

    /// Checks the shape expected of the order-`n` correction: even
    /// `s`-powers, no constant term and degree bounded by `s^{2n} t`.
    pub fn conforms_to_order(&self, n: u32) -> bool {
        self.terms.keys().all(|&(i, j)| {
            let a = i / 2;
            i % 2 == 0 && (i, j) != (0, 0) && a <= n && j <= 2 * (n - a) + 1
        })
    }

    fn from_grid(g: &Grid<Rational>) -> Self {
        let mut terms = BTreeMap::new();
        for (a, row) in g.rows.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if v.cmp0() != std::cmp::Ordering::Equal {
                    terms.insert((2 * a as u32, b as u32), v.clone());
                }
            }
        }
        PhasePolynomial { terms }
    }

    fn to_grid(&self) -> Grid<Rational> {
        let mut g = Grid::new();
        for (&(i, j), v) in &self.terms {
            g.ensure(i as usize / 2, j as usize, &Rational::new());
            g.rows[i as usize / 2][j as usize] = v.clone();
        }
        g
    }
}

/// Energy coefficients `ε₀..ε_N` of one state and the phase corrections
/// `Φ₀..Φ_K` that were computed alongside (`K ≤ N`, possibly `K < N`).
#[derive(Clone, Debug, PartialEq)]
pub struct PtSeries {
    pub state: StateLabel,
    pub epsilons: Vec<Rational>,
    pub corrections: Vec<PhasePolynomial>,
}

impl PtSeries {
    pub fn order(&self) -> usize {
        self.epsilons.len().saturating_sub(1)
    }

    /// Zeroth-order data: `Φ₀ = κt`, `ε₀ = -κ²` with `κ = 1/(p+1)`.
    pub fn leading(state: StateLabel) -> Result<Self> {
        let shape = shape_of(state)?;
        let kappa = Rational::from((shape.twok, 2));
        let mut phi0 = PhasePolynomial::default();
        phi0.terms.insert((0, 1), kappa.clone());
        Ok(PtSeries {
            state,
            epsilons: vec![-Rational::from(&kappa * &kappa)],
            corrections: vec![phi0],
        })
    }

    /// Every stored `εₙ` satisfies `(-1)^{n+1} εₙ > 0`.
    pub fn signs_alternate(&self) -> bool {
        self.epsilons.iter().enumerate().all(|(n, e)| {
            let want = if n % 2 == 1 { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Less };
            e.cmp0() == want
        })
    }

    pub fn epsilon_f64(&self, n: usize) -> f64 {
        self.epsilons[n].to_f64()
    }
}

fn shape_of(state: StateLabel) -> Result<OperatorShape> {
    match (state.m, state.p) {
        (0, 0) => Ok(OperatorShape { twok: 2, c: 2 }),
        (0, 1) => Ok(OperatorShape { twok: 1, c: 4 }),
        _ => Err(Error::Unsupported(format!("perturbation theory implemented for m = 0 only, got {state}"))),
    }
}

/// Computes `(Φₙ, εₙ)` for `n = prev.order() + 1` from full lower corrections.
pub fn next_correction(prev: &PtSeries) -> Result<(PhasePolynomial, Rational)> {
    let shape = shape_of(prev.state)?;
    let n = prev.epsilons.len();
    if prev.corrections.len() != n {
        return Err(Error::InsufficientOrder { needed: n, have: prev.corrections.len() });
    }
    let scaled: Vec<phase::ScaledPhase> =
        prev.corrections.iter().map(|c| phase::ScaledPhase::from_grid(&c.to_grid())).collect();
    let (phi, eps) = phase::step(shape, &scaled, n);
    let poly = PhasePolynomial::from_grid(&phi);
    check_correction(prev.state, n, &poly, &eps)?;
    Ok((poly, eps))
}

fn check_correction(state: StateLabel, n: usize, poly: &PhasePolynomial, eps: &Rational) -> Result<()> {
    if !poly.conforms_to_order(n as u32) {
        return Err(Error::Internal(format!("correction of order {n} violates the ansatz shape")));
    }
    if state == StateLabel::GROUND {
        let conn = Rational::from(4 * poly.coeff(2, 0) + 6 * poly.coeff(0, 2));
        if &conn != eps {
            return Err(Error::Internal(format!("energy connection fails at order {n}")));
        }
    }
    Ok(())
}

/// Options for [`run_with`].
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Highest order for which `Φₙ` is built by the phase recursion.
    pub phase_orders: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { phase_orders: DEFAULT_PHASE_ORDERS }
    }
}

/// Energies through order `n_max` and phase corrections through
/// `min(n_max, DEFAULT_PHASE_ORDERS)`.
pub fn run(state: StateLabel, n_max: usize) -> Result<PtSeries> {
    run_with(state, n_max, RunOptions::default())
}

pub fn run_with(state: StateLabel, n_max: usize, opts: RunOptions) -> Result<PtSeries> {
    let shape = shape_of(state)?;
    let mut series = PtSeries::leading(state)?;
    let k_max = opts.phase_orders.min(n_max);
    let mut scaled = vec![phase::ScaledPhase::from_grid(&series.corrections[0].to_grid())];
    for n in 1..=k_max {
        let (phi, eps) = phase::step(shape, &scaled, n);
        let poly = PhasePolynomial::from_grid(&phi);
        check_correction(state, n, &poly, &eps)?;
        scaled.push(phase::ScaledPhase::from_grid(&phi));
        series.corrections.push(poly);
        series.epsilons.push(eps);
    }
    if n_max > 0 {
        let lifted = linear::energies_multimodular(shape, n_max);
        for (n, e) in lifted.into_iter().enumerate().map(|(i, e)| (i + 1, e)) {
            if n <= k_max {
                if series.epsilons[n] != e {
                    return Err(Error::Internal(format!("phase and wavefunction recursions disagree at order {n}")));
                }
            } else {
                series.epsilons.push(e);
            }
        }
    }
    Ok(series)
}

/// Exact energies from the wavefunction recursion in rational arithmetic;
/// slow, kept as an independent reference.
pub fn energies_reference(state: StateLabel, n_max: usize) -> Result<Vec<Rational>> {
    let shape = shape_of(state)?;
    let mut out = vec![PtSeries::leading(state)?.epsilons[0].clone()];
    out.extend(linear::energies_rational(shape, n_max));
    Ok(out)
}

/// Laurent polynomial in `(s, t)` keyed by `(s-exponent, t-exponent)`.
pub type LaurentPoly = BTreeMap<(u32, i32), Rational>;

/// Substitutes the truncated series into the Riccati-Bloch equation
/// `ΔΦ + (c-2)/t ∂ₜΦ − |∇Φ|² − 2/t + λ²s²/4 − ε = 0` and returns the
/// coefficient of `λ^{2k}` for `k = 0..=n_max`. Every entry is exactly zero
/// for a correct series.
pub fn rb_residual(series: &PtSeries, n_max: usize) -> Result<Vec<LaurentPoly>> {
    let shape = shape_of(series.state)?;
    let c = shape.c;
    if series.corrections.len() <= n_max || series.epsilons.len() <= n_max {
        return Err(Error::InsufficientOrder { needed: n_max, have: series.corrections.len().saturating_sub(1) });
    }
    let add = |p: &mut LaurentPoly, key: (u32, i32), v: Rational| {
        let e = p.entry(key).or_default();
        *e += v;
    };
    let mut out = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let mut res = LaurentPoly::new();
        // Laplacian part acting on Φ_k.
        for (&(i, j), v) in &series.corrections[k].terms {
            let (a, b) = ((i / 2) as i64, j as i64);
            if a >= 1 {
                add(&mut res, (i - 2, j as i32), Rational::from(v * (4 * a * a)));
            }
            let m = b * (4 * a + b - 1 + c);
            if m != 0 {
                add(&mut res, (i, j as i32 - 2), Rational::from(v * m));
            }
        }
        // −Σ B(Φ_i, Φ_{k-i}) with the gradient product written out directly.
        for i1 in 0..=k {
            for (&(s1, t1), v1) in &series.corrections[i1].terms {
                for (&(s2, t2), v2) in &series.corrections[k - i1].terms {
                    let prod = Rational::from(v1 * v2);
                    let (s1i, t1i, s2i, t2i) = (s1 as i64, t1 as i64, s2 as i64, t2 as i64);
                    // Φ_s Φ_s
                    if s1 > 0 && s2 > 0 {
                        add(&mut res, (s1 + s2 - 2, (t1 + t2) as i32), Rational::from(&prod * (-s1i * s2i)));
                    }
                    // Φ_t Φ_t + (s/t)(Φ_s Φ_t + Φ_t Φ_s)
                    let m = t1i * t2i + s1i * t2i + s2i * t1i;
                    if m != 0 {
                        add(&mut res, (s1 + s2, t1 as i32 + t2 as i32 - 2), Rational::from(&prod * (-m)));
                    }
                }
            }
        }
        if k == 0 {
            add(&mut res, (0, -1), Rational::from(-2));
        }
        if k == 1 {
            add(&mut res, (2, 0), Rational::from((1, 4)));
        }
        add(&mut res, (0, 0), -series.epsilons[k].clone());
        res.retain(|_, v| v.cmp0() != std::cmp::Ordering::Equal);
        out.push(res);
    }
    Ok(out)
}

/// Partial sums `σ₁ = Σ b_{n-1,n-1}^{(n)} λ²ⁿ`, `σ₂ = Σ b_{n-1,n}^{(n)} λ²ⁿ`,
/// `σ₃ = Σ a_{n-1,n-1}^{(n)} λ²ⁿ` over `n = 1..=n_max`, exact in `λ`.
pub fn sigma_sums(series: &PtSeries, lambda: &Rational, n_max: usize) -> Result<(Rational, Rational, Rational)> {
    if series.corrections.len() <= n_max {
        return Err(Error::InsufficientOrder { needed: n_max, have: series.corrections.len().saturating_sub(1) });
    }
    let l2 = Rational::from(lambda * lambda);
    let mut pow = Rational::from(1);
    let (mut s1, mut s2, mut s3) = (Rational::new(), Rational::new(), Rational::new());
    for n in 1..=n_max {
        pow *= &l2;
        let phi = &series.corrections[n];
        s1 += Rational::from(phi.coeff(2, 0) * &pow);
        s2 += Rational::from(phi.coeff(0, 2) * &pow);
        s3 += Rational::from(phi.coeff(2, 1) * &pow);
    }
    Ok((s1, s2, s3))
}

/// Large-order estimate `64(-1)^{n+1} π^{-5/2-2n} Γ(2n+3/2) (1 - A/n)`,
/// with `A = 2.61` when `with_subleading` is set and `A = 0` otherwise.
pub fn large_order_estimate(n: u32, with_subleading: bool) -> f64 {
    let prec = 128;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let lg = Float::with_val(prec, 2 * n as i64) + 1.5f64;
    let log_mag = Float::with_val(prec, lg.ln_gamma()) + Float::with_val(prec, 64).ln()
        - Float::with_val(prec, pi.ln()) * (2.5 + 2.0 * n as f64);
    let mut v = log_mag.exp().to_f64();
    if with_subleading {
        v *= 1.0 - 2.61 / n as f64;
    }
    if n % 2 == 1 {
        v
    } else {
        -v
    }
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = Integer::from_str_radix(n.trim(), 10).ok()?;
    let d = Integer::from_str_radix(d.trim(), 10).ok()?;
    if d.cmp0() == std::cmp::Ordering::Equal {
        return None;
    }
    Some(Rational::from((n, d)))
}
