//! Padé-Borel summation of the divergent energy series `ε(γ²) = Σ εₙ γ²ⁿ`.
//!
//! The Borel-Leroy transform divides by `Γ(2n+3/2)`, the factorial growth of
//! the coefficients, so that
//!
//! ```text
//! ε(g) = ∫₀^∞ e^{-u} u^{1/2} B(g u²) du,   B(x) = Σ εₙ xⁿ / Γ(2n+3/2).
//! ```
//!
//! `B` is continued past its radius of convergence by a Padé approximant and
//! the Laplace integral is done by tanh-sinh quadrature in multiprecision.

use crate::error::{Error, Result};
use crate::rb_pt::PtSeries;
use rug::float::Constant;
use rug::{Float, Rational};

/// Working precision for the Padé linear systems.
pub const PADE_PRECISION: u32 = 512;
/// Working precision for the Laplace integral.
pub const INTEGRAL_PRECISION: u32 = 256;
/// Spread above which a resummed value is flagged as unreliable.
pub const SPREAD_WARNING: f64 = 1e-6;

/// Borel coefficients `cₙ = εₙ / Γ(2n+3/2)`.
#[derive(Clone, Debug)]
pub struct BorelSeries {
    pub coeffs: Vec<Float>,
    pub source_order: usize,
    pub precision_bits: u32,
}

impl BorelSeries {
    /// Largest `|c_{n+1}/cₙ|` over the stored range; stays bounded because
    /// the factorial growth has been divided out.
    pub fn max_ratio(&self) -> f64 {
        self.coeffs
            .windows(2)
            .map(|w| Float::with_val(64, &w[1] / &w[0]).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

/// `Γ(2n+3/2) / √π = (4n+1)!! / 2^{2n+1}` as an exact rational.
fn gamma_ratio(n: usize) -> Rational {
    let mut r = Rational::from((1, 2));
    for k in 1..=2 * n {
        r *= Rational::from((2 * k as i64 + 1, 2));
    }
    r
}

pub fn borel_transform(series: &PtSeries, precision_bits: u32) -> Result<BorelSeries> {
    if precision_bits < 64 {
        return Err(Error::Precision(format!("{precision_bits} bits is below the 64-bit minimum")));
    }
    let sqrt_pi = Float::with_val(precision_bits + 32, Constant::Pi).sqrt();
    let coeffs = series
        .epsilons
        .iter()
        .enumerate()
        .map(|(n, e)| {
            // One correctly rounded rational division, one division by √π.
            let q = Rational::from(e / gamma_ratio(n));
            let f = Float::with_val(precision_bits + 32, &q) / &sqrt_pi;
            Float::with_val(precision_bits, f)
        })
        .collect::<Vec<_>>();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Precision("Borel coefficient overflow".into()));
    }
    Ok(BorelSeries { coeffs, source_order: series.order(), precision_bits })
}

/// `[L/M]` approximant `P(x)/Q(x)` with `Q(0) = 1`.
#[derive(Clone, Debug)]
pub struct PadeApproximant {
    pub numerator: Vec<Float>,
    pub denominator: Vec<Float>,
    pub l: usize,
    pub m: usize,
}

impl PadeApproximant {
    pub fn eval(&self, x: &Float) -> Float {
        let prec = x.prec();
        let horner = |c: &[Float]| {
            let mut acc = Float::with_val(prec, 0);
            for v in c.iter().rev() {
                acc *= x;
                acc += v;
            }
            acc
        };
        horner(&self.numerator) / horner(&self.denominator)
    }

    pub fn denominator_at(&self, x: &Float) -> Float {
        let mut acc = Float::with_val(x.prec(), 0);
        for v in self.denominator.iter().rev() {
            acc *= x;
            acc += v;
        }
        acc
    }
}

/// Builds `[L/M]` from `c₀..c_{L+M}` by solving the denominator system with
/// full pivoting.
pub fn pade(borel: &BorelSeries, l: usize, m: usize) -> Result<PadeApproximant> {
    if l + m >= borel.coeffs.len() {
        return Err(Error::InsufficientOrder { needed: l + m, have: borel.source_order });
    }
    let prec = borel.precision_bits;
    // Work in y = x/R with R the root-test radius of c₀..c_{L+M}, so the
    // scaled coefficients are O(1). For the ground state R is close to π².
    let radius = convergence_radius(&borel.coeffs[..=l + m], prec);
    let mut scaled = Vec::with_capacity(l + m + 1);
    let mut pow = Float::with_val(prec, 1);
    for cn in borel.coeffs.iter().take(l + m + 1) {
        scaled.push(Float::with_val(prec, cn * &pow));
        pow *= &radius;
    }
    let c = |k: isize| -> Float {
        if k < 0 {
            Float::with_val(prec, 0)
        } else {
            scaled[k as usize].clone()
        }
    };
    let mut q = vec![Float::with_val(prec, 1)];
    if m > 0 {
        // Σ_{j=1}^{M} c_{L+i-j} q_j = -c_{L+i},  i = 1..M
        let mut a: Vec<Vec<Float>> = (1..=m)
            .map(|i| (1..=m).map(|j| c(l as isize + i as isize - j as isize)).collect())
            .collect();
        let mut rhs: Vec<Float> = (1..=m).map(|i| -c((l + i) as isize)).collect();
        let scale = a
            .iter()
            .flatten()
            .map(|v| Float::with_val(prec, v.abs_ref()))
            .fold(Float::with_val(prec, 0), |acc, v| if v > acc { v } else { acc });
        let tiny = Float::with_val(prec, &scale) >> (prec as i32 - 64);
        let mut col_perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (mut pi, mut pj) = (k, k);
            let mut best = Float::with_val(prec, -1);
            for (i, row) in a.iter().enumerate().skip(k) {
                for (j, v) in row.iter().enumerate().skip(k) {
                    let av = Float::with_val(prec, v.abs_ref());
                    if av > best {
                        best = av;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if best <= tiny {
                return Err(Error::DegeneratePade { l, m });
            }
            a.swap(k, pi);
            rhs.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            col_perm.swap(k, pj);
            for i in k + 1..m {
                let f = Float::with_val(prec, &a[i][k] / &a[k][k]);
                if f.is_zero() {
                    continue;
                }
                for j in k..m {
                    let t = Float::with_val(prec, &f * &a[k][j]);
                    a[i][j] -= t;
                }
                let t = Float::with_val(prec, &f * &rhs[k]);
                rhs[i] -= t;
            }
        }
        let mut x = vec![Float::with_val(prec, 0); m];
        for k in (0..m).rev() {
            let mut s = rhs[k].clone();
            for j in k + 1..m {
                s -= Float::with_val(prec, &a[k][j] * &x[j]);
            }
            x[k] = s / &a[k][k];
        }
        let mut sol = vec![Float::with_val(prec, 0); m];
        for (k, &cp) in col_perm.iter().enumerate() {
            sol[cp] = x[k].clone();
        }
        q.extend(sol);
    }
    let mut p: Vec<Float> = (0..=l)
        .map(|i| {
            let mut s = Float::with_val(prec, 0);
            for (j, qj) in q.iter().enumerate().take(i.min(m) + 1) {
                s += Float::with_val(prec, qj * &scaled[i - j]);
            }
            s
        })
        .collect();
    // Back to the variable x.
    let mut pow = Float::with_val(prec, 1);
    for k in 0..=l.max(m) {
        if k <= l {
            p[k] /= &pow;
        }
        if k <= m {
            q[k] /= &pow;
        }
        pow *= &radius;
    }
    Ok(PadeApproximant { numerator: p, denominator: q, l, m })
}

fn convergence_radius(c: &[Float], prec: u32) -> Float {
    let k = c.len() - 1;
    if k == 0 || c[0].is_zero() || c[k].is_zero() {
        return Float::with_val(prec, 1);
    }
    let ratio = Float::with_val(prec, &c[0] / &c[k]).abs();
    ratio.root(k as u32)
}

/// Tanh-sinh rule on `[0, U]` at step `h = 2^{-level}`.
fn laplace_integral(pa: &PadeApproximant, g: &Float, digits: u32) -> Result<Float> {
    let prec = g.prec();
    // Tail: e^{-U} U^{1/2} < 10^{-(digits+6)}.
    let target = (digits as f64 + 6.0) * std::f64::consts::LN_10;
    let mut upper = target;
    for _ in 0..50 {
        upper = target + 0.5 * upper.ln();
    }
    let upper = Float::with_val(prec, upper);
    let half_pi = Float::with_val(prec, Constant::Pi) / 2u32;
    let half = Float::with_val(prec, &upper / 2u32);
    let eval_node = |t: f64| -> Result<Float> {
        let t = Float::with_val(prec, t);
        let sh = Float::with_val(prec, t.sinh_ref());
        let ch = Float::with_val(prec, t.cosh_ref());
        let arg = Float::with_val(prec, &half_pi * &sh);
        let th = Float::with_val(prec, arg.tanh_ref());
        let cha = Float::with_val(prec, arg.cosh_ref());
        // Node and weight with the complement 1 ∓ tanh kept accurate near the ends.
        let u = Float::with_val(prec, &half * Float::with_val(prec, 1 + &th));
        let w = Float::with_val(prec, &half * &half_pi) * ch / Float::with_val(prec, &cha * &cha);
        if u.is_zero() || w.is_zero() {
            return Ok(Float::with_val(prec, 0));
        }
        let x = Float::with_val(prec, g * Float::with_val(prec, &u * &u));
        let den = pa.denominator_at(&x);
        if den.cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Integration(format!(
                "[{}/{}] denominator vanishes on the positive axis near u = {:.6}",
                pa.l,
                pa.m,
                u.to_f64()
            )));
        }
        let f = pa.eval(&x);
        let kernel = Float::with_val(prec, (-Float::with_val(prec, &u)).exp()) * Float::with_val(prec, u.sqrt_ref());
        Ok(kernel * f * w)
    };
    let tmax = 4.5f64;
    let mut h = 0.25f64;
    let mut sum = eval_node(0.0)?;
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval_node(k as f64 * h)?;
        sum += eval_node(-(k as f64) * h)?;
        k += 1;
    }
    let mut estimate = Float::with_val(prec, &sum * h);
    let tol = Float::with_val(prec, 10f64.powi(-(digits as i32)));
    for _level in 0..9 {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval_node(t)?;
            sum += eval_node(-t)?;
            k += 2;
        }
        let next = Float::with_val(prec, &sum * h);
        let diff = Float::with_val(prec, &next - &estimate).abs();
        estimate = next;
        if diff < tol {
            return Ok(estimate);
        }
    }
    Err(Error::Integration("tanh-sinh refinement did not converge".into()))
}

/// Result of a resummation at one field strength.
#[derive(Clone, Debug)]
pub struct Resummed {
    pub energy: f64,
    /// Spread of the approximant family (zero for a single approximant).
    pub uncertainty: f64,
    /// `(L, M, value)` of every approximant actually used.
    pub members: Vec<(usize, usize, f64)>,
    /// Set when the spread exceeds [`SPREAD_WARNING`].
    pub warning: bool,
}

/// The near-diagonal family used by default for a series through order `N`.
pub fn default_family(order: usize) -> Vec<(usize, usize)> {
    let k = order / 2;
    if k < 2 {
        return vec![(order, 0)];
    }
    vec![(k - 1, k), (k, k - 1), (k - 1, k - 1), (k - 2, k - 1)]
}

/// Resummed value of one approximant; on a degenerate block `L` is lowered
/// (at most three times).
pub fn resummed_single(
    gamma: f64,
    borel: &BorelSeries,
    l: usize,
    m: usize,
    precision_bits: u32,
) -> Result<(usize, usize, f64)> {
    let g = Float::with_val(precision_bits, gamma) * Float::with_val(precision_bits, gamma);
    let digits = (precision_bits as f64 * 0.3010 / 4.0).clamp(16.0, 40.0) as u32;
    let mut last_err = None;
    for drop in 0..=3usize {
        if drop > l {
            break;
        }
        let ll = l - drop;
        match pade(borel, ll, m) {
            Ok(pa) => {
                let pa = lower_precision(&pa, precision_bits);
                match laplace_integral(&pa, &g, digits) {
                    Ok(v) => return Ok((ll, m, v.to_f64())),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(e @ Error::DegeneratePade { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::DegeneratePade { l, m }))
}

fn lower_precision(pa: &PadeApproximant, prec: u32) -> PadeApproximant {
    let conv = |v: &Vec<Float>| v.iter().map(|x| Float::with_val(prec, x)).collect();
    PadeApproximant { numerator: conv(&pa.numerator), denominator: conv(&pa.denominator), l: pa.l, m: pa.m }
}

/// Median and spread over `family` (default: [`default_family`]).
pub fn resummed_energy(
    gamma: f64,
    series: &PtSeries,
    family: Option<&[(usize, usize)]>,
    precision_bits: u32,
) -> Result<Resummed> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
    }
    let borel = borel_transform(series, PADE_PRECISION.max(precision_bits))?;
    let fam: Vec<(usize, usize)> = match family {
        Some(f) => f.to_vec(),
        None => default_family(series.order()),
    };
    let mut members = Vec::with_capacity(fam.len());
    for &(l, m) in &fam {
        members.push(resummed_single(gamma, &borel, l, m, precision_bits)?);
    }
    let mut vals: Vec<f64> = members.iter().map(|m| m.2).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    let n = vals.len();
    let median = if n % 2 == 1 { vals[n / 2] } else { 0.5 * (vals[n / 2 - 1] + vals[n / 2]) };
    let spread = vals[n - 1] - vals[0];
    Ok(Resummed { energy: median, uncertainty: spread, members, warning: spread > SPREAD_WARNING })
}

/// Sum of the raw series up to (and including) its smallest term.
pub fn optimal_truncation(gamma: f64, series: &PtSeries) -> f64 {
    let g = gamma * gamma;
    let mut sum = 0.0;
    let mut best = f64::INFINITY;
    let mut pow = 1.0;
    for e in &series.epsilons {
        let term = e.to_f64() * pow;
        if term.abs() > best {
            break;
        }
        best = term.abs();
        sum += term;
        pow *= g;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rb_pt::run;
    use crate::units::StateLabel;

    #[test]
    fn leading_borel_coefficients() {
        let s = run(StateLabel::GROUND, 2).unwrap();
        let b = borel_transform(&s, 256).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((b.coeffs[0].to_f64() + 2.0 / sqrt_pi).abs() < 1e-15);
        assert!((b.coeffs[1].to_f64() - 4.0 / (15.0 * sqrt_pi)).abs() < 1e-15);
    }

    #[test]
    fn low_order_pade() {
        let s = run(StateLabel::GROUND, 3).unwrap();
        let b = borel_transform(&s, 256).unwrap();
        let p00 = pade(&b, 0, 0).unwrap();
        assert_eq!(p00.numerator[0], b.coeffs[0]);
        let p10 = pade(&b, 1, 0).unwrap();
        assert_eq!(p10.numerator[1], b.coeffs[1]);
    }

    #[test]
    fn zero_field_is_unperturbed() {
        let s = run(StateLabel::GROUND, 10).unwrap();
        let r = resummed_energy(0.0, &s, Some(&[(4, 5)]), 256).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-15);
    }
}
