//! Closed-form objects of the generalized Bloch equation, where the phase is
//! written in the field-scaled variables `u = γρ` and `v = r`.
//!
//! The zero-order phase is `φ₀ = w v + log w + K log(1/K + w)` with
//! `K = |m| + p + 1` and `w = √(1/K² + u²/12)`. For the ground state the
//! first correction `φ₁` is known in closed form, and expanding both in `u²`
//! must reproduce, coefficient by coefficient, the polynomials `Φₙ(s,t)` of
//! the weak-field expansion ([`generating_check`]).

use crate::error::{Error, Result};
use crate::rb_pt::PtSeries;
use crate::units::StateLabel;
use rug::Rational;

/// `w_{m,p}(u) = √(1/K² + u²/12)`.
pub fn w_mp(u: f64, state: StateLabel) -> f64 {
    let k = state.principal() as f64;
    (1.0 / (k * k) + u * u / 12.0).sqrt()
}

/// Zero-order phase `φ₀(u, v)`.
pub fn phi0(u: f64, v: f64, state: StateLabel) -> f64 {
    let k = state.principal() as f64;
    let w = w_mp(u, state);
    w * v + w.ln() + k * (1.0 / k + w).ln()
}

/// `(φ₀, φ_u, φ_v, φ_uv, φ_vv)` at `(u, v)`.
pub fn phi0_derivatives(u: f64, v: f64, state: StateLabel) -> (f64, f64, f64, f64, f64) {
    let k = state.principal() as f64;
    let w = w_mp(u, state);
    let dw = u / (12.0 * w);
    let du = dw * v + dw / w + k * dw / (1.0 / k + w);
    (phi0(u, v, state), du, w, dw, 0.0)
}

/// Residual of the zero-order GB equation
/// `φ_vv + (2u/v)φ_uv + (c/v)φ_v − (2u/v)φ_uφ_v − φ_v² − ε₀ − 2/v + u²/4`
/// with `c = 2 + 2p` and `ε₀ = −1/K²`.
pub fn gb_zero_residual(u: f64, v: f64, state: StateLabel) -> f64 {
    let (_, pu, pv, puv, pvv) = phi0_derivatives(u, v, state);
    let k = state.principal() as f64;
    let c = 2.0 + 2.0 * state.p as f64;
    let eps0 = -1.0 / (k * k);
    pvv + 2.0 * u / v * puv + c / v * pv - 2.0 * u / v * pu * pv - pv * pv - eps0 - 2.0 / v + u * u / 4.0
}

/// Coefficients `(A₀⁽¹⁾, B₀⁽¹⁾, A₁⁽¹⁾, B₁⁽¹⁾)` of the ground-state first
/// correction `−φ₁ = A₀ v³ + B₀ v² + A₁ v + B₁`.
pub fn phi1_coeffs(w: f64) -> [f64; 4] {
    let (w2, w3) = (w * w, w * w * w);
    let (w4, w5, w6) = (w3 * w, w3 * w2, w3 * w3);
    [
        (w - 1.0) * (w + 1.0) / (120.0 * w3),
        (6.0 * w3 - w2 - 9.0 * w - 6.0) / (120.0 * (w + 1.0) * w4),
        (w - 1.0) * (30.0 * w4 + 52.0 * w3 + 54.0 * w2 + 42.0 * w + 15.0) / (120.0 * (w + 1.0) * w5),
        (w - 1.0) * (9.0 * w6 + 18.0 * w5 + 38.0 * w4 + 46.0 * w3 + 42.0 * w2 + 30.0 * w + 10.0)
            / (80.0 * (w + 1.0) * w6),
    ]
}

/// Leading large-distance phase along `s = αt`: `¼α²λt² + 2 log t`.
pub fn asymptotic_phase(alpha: f64, lambda: f64, t: f64) -> f64 {
    generating_a(alpha) * lambda * t * t + 2.0 * t.ln()
}

/// Closed-form sum `𝒜(α) = α²/4` of the directional asymptotic coefficients.
pub fn generating_a(alpha: f64) -> f64 {
    0.25 * alpha * alpha
}

/// Residual of `(1 − α²)𝒜'² + 4𝒜² − α²/4` at `𝒜 = α²/4`.
pub fn generating_a_ode_residual(alpha: f64) -> f64 {
    let a = generating_a(alpha);
    let da = 0.5 * alpha;
    (1.0 - alpha * alpha) * da * da + 4.0 * a * a - 0.25 * alpha * alpha
}

/// Partial sum `α Σ_{n<N} 𝒜ₙ α^{-2n}` with the three known `𝒜ₙ`.
pub fn script_a_partial_sum(alpha: f64, terms: usize) -> f64 {
    let r3 = 3f64.sqrt();
    let coeffs = [1.0 / (2.0 * r3), -1.0 / (20.0 * r3), -23.0 / (2800.0 * r3)];
    let inv2 = 1.0 / (alpha * alpha);
    alpha * coeffs.iter().take(terms).enumerate().map(|(n, c)| c * inv2.powi(n as i32)).sum::<f64>()
}

/// Parameter-free trial function `Ψ₀ = e^{−rw} / (1 + w + γ²ρ²/12)`.
pub fn psi0_eval(rho: f64, r: f64, gamma: f64) -> f64 {
    let g = gamma * gamma * rho * rho / 12.0;
    let w = (1.0 + g).sqrt();
    (-r * w).exp() / (1.0 + w + g)
}

/// Parameter-free trial function `Ψ₁ = e^{−rw}`.
pub fn psi1_eval(rho: f64, r: f64, gamma: f64) -> f64 {
    let w = (1.0 + gamma * gamma * rho * rho / 12.0).sqrt();
    (-r * w).exp()
}

/// Truncated power series with exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
struct Series(Vec<Rational>);

impl Series {
    fn constant(c: Rational, len: usize) -> Self {
        let mut v = vec![Rational::new(); len];
        v[0] = c;
        Series(v)
    }

    fn monomial1(c: Rational, len: usize) -> Self {
        let mut v = vec![Rational::new(); len];
        if len > 1 {
            v[1] = c;
        }
        Series(v)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| Rational::from(a + b)).collect())
    }

    fn scale(&self, c: &Rational) -> Series {
        Series(self.0.iter().map(|a| Rational::from(a * c)).collect())
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.len();
        let mut out = vec![Rational::new(); n];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().take(n - i).enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Series(out)
    }

    fn inv(&self) -> Series {
        let n = self.len();
        let a0 = self.0[0].clone();
        let mut b = vec![Rational::new(); n];
        b[0] = Rational::from(a0.recip_ref());
        for k in 1..n {
            let mut s = Rational::new();
            for i in 1..=k {
                s += Rational::from(&self.0[i] * &b[k - i]);
            }
            b[k] = -Rational::from(s / &a0);
        }
        Series(b)
    }

    /// Square root of a series with constant term 1.
    fn sqrt1(&self) -> Series {
        let n = self.len();
        let mut s = vec![Rational::new(); n];
        s[0] = Rational::from(1);
        for k in 1..n {
            let mut acc = self.0[k].clone();
            for i in 1..k {
                acc -= Rational::from(&s[i] * &s[k - i]);
            }
            s[k] = acc / 2u32;
        }
        Series(s)
    }

    /// Logarithm of a series with constant term 1.
    fn log1(&self) -> Series {
        let n = self.len();
        let mut l = vec![Rational::new(); n];
        for k in 1..n {
            let mut acc = Rational::from(&self.0[k] * k as u32);
            for i in 1..k {
                acc -= Rational::from(&l[i] * i as u32) * &self.0[k - i];
            }
            l[k] = acc / k as u32;
        }
        Series(l)
    }
}

/// Closed-form coefficient functions as series in `y = u²/12`.
struct ClosedForms {
    len: usize,
    /// `w / k` where `k = 1/K`, so the constant term is 1.
    w_hat: Series,
    k: Rational,
    big_k: u32,
}

impl ClosedForms {
    fn new(state: StateLabel, len: usize) -> Self {
        let big_k = state.principal();
        let k2 = Rational::from(big_k * big_k);
        let w_hat = Series::constant(Rational::from(1), len).add(&Series::monomial1(k2, len)).sqrt1();
        ClosedForms { len, w_hat, k: Rational::from((1, big_k)), big_k }
    }

    fn w(&self) -> Series {
        self.w_hat.scale(&self.k)
    }

    /// `log w + K log(1/K + w)` without its constant term.
    fn b00(&self) -> Series {
        let one = Series::constant(Rational::from(1), self.len);
        let half = Rational::from((1, 2));
        // 1/K + w = (2/K)·(1 + ŵ)/2
        let mid = one.add(&self.w_hat).scale(&half);
        self.w_hat.log1().add(&mid.log1().scale(&Rational::from(self.big_k)))
    }

    /// Ground-state `(A₀⁽¹⁾, B₀⁽¹⁾, A₁⁽¹⁾, B₁⁽¹⁾)` as series.
    fn phi1(&self) -> [Series; 4] {
        let w = self.w();
        let len = self.len;
        let c = |v: i64| Series::constant(Rational::from(v), len);
        let poly = |cs: &[i64]| {
            // Σ cs[i] wⁱ by Horner.
            let mut acc = c(0);
            for &ci in cs.iter().rev() {
                acc = acc.mul(&w).add(&c(ci));
            }
            acc
        };
        let pow = |e: usize| {
            let mut acc = c(1);
            for _ in 0..e {
                acc = acc.mul(&w);
            }
            acc
        };
        let wm1 = poly(&[-1, 1]);
        let wp1 = poly(&[1, 1]);
        let a0 = wm1.mul(&wp1).mul(&pow(3).scale(&Rational::from(120)).inv());
        let b0 = poly(&[-6, -9, -1, 6]).mul(&wp1.mul(&pow(4)).scale(&Rational::from(120)).inv());
        let a1 = wm1.mul(&poly(&[15, 42, 54, 52, 30])).mul(&wp1.mul(&pow(5)).scale(&Rational::from(120)).inv());
        let b1 = wm1
            .mul(&poly(&[10, 30, 42, 46, 38, 18, 9]))
            .mul(&wp1.mul(&pow(6)).scale(&Rational::from(80)).inv());
        [a0, b0, a1, b1]
    }
}

/// One compared coefficient of a generating-function check.
#[derive(Clone, Debug)]
pub struct GeneratingEntry {
    /// `'A'` or `'B'`.
    pub family: char,
    pub k: u32,
    pub n: u32,
    /// Power of `u²`.
    pub j: u32,
    /// Taylor coefficient of the closed form.
    pub closed_form: Rational,
    /// Matching coefficient of `Φ_{n+j}`.
    pub perturbative: Rational,
}

impl GeneratingEntry {
    pub fn passes(&self) -> bool {
        self.closed_form == self.perturbative
    }
}

#[derive(Clone, Debug)]
pub struct GeneratingReport {
    pub entries: Vec<GeneratingEntry>,
}

impl GeneratingReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(GeneratingEntry::passes)
    }
}

/// Compares the `u²`-expansion of `A_k^{(n)}` and `B_k^{(n)}` with the
/// coefficients `a_{k,n}^{(n+j)}`, `b_{k,n}^{(n+j)}` of the weak-field
/// polynomials, for `j = 0..=j_max`. The `j = 0` term of `B₀⁽⁰⁾` is a
/// normalization constant and is skipped.
///
/// `A_k^{(n)}` multiplies `v^{2(n−k)+1}`, so its `u^{2j}` coefficient is the
/// `s^{2j} t^{2(n−k)+1}` coefficient of `Φ_{n+j}` (with an overall minus
/// sign for `n = 1`).
pub fn generating_check(k: u32, n: u32, j_max: u32, series: &PtSeries) -> Result<GeneratingReport> {
    if k > n || n > 1 {
        return Err(Error::Domain(format!("closed forms exist for n <= 1 and k <= n, got k={k} n={n}")));
    }
    if n == 1 && series.state != StateLabel::GROUND {
        return Err(Error::Unsupported(format!("first-order closed forms are known for 1s0 only, got {}", series.state)));
    }
    let needed = (n + j_max) as usize;
    if series.corrections.len() <= needed {
        return Err(Error::InsufficientOrder { needed, have: series.corrections.len().saturating_sub(1) });
    }
    let len = j_max as usize + 1;
    let cf = ClosedForms::new(series.state, len);
    let (a_series, b_series, sign) = if n == 0 {
        (cf.w(), cf.b00(), Rational::from(1))
    } else {
        let [a0, b0, a1, b1] = cf.phi1();
        if k == 0 {
            (a0, b0, Rational::from(-1))
        } else {
            (a1, b1, Rational::from(-1))
        }
    };
    let twelve = Rational::from(12);
    let mut entries = Vec::new();
    let mut scale = Rational::from(1);
    for j in 0..=j_max {
        let poly = &series.corrections[(n + j) as usize];
        let t_a = 2 * (n - k) + 1;
        for (family, ser, t_exp) in [('A', &a_series, t_a), ('B', &b_series, t_a - 1)] {
            if family == 'B' && n == 0 && j == 0 {
                continue;
            }
            let closed = Rational::from(&ser.0[j as usize] * &scale) * &sign;
            entries.push(GeneratingEntry {
                family,
                k,
                n,
                j,
                closed_form: closed,
                perturbative: poly.coeff(2 * j, t_exp),
            });
        }
        scale /= &twelve;
    }
    Ok(GeneratingReport { entries })
}
