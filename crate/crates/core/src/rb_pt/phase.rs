//! Phase recursion: order-n corrections `Φₙ` of the Riccati-Bloch equation.
//!
//! `M Φₙ = Qₙ − εₙ` with `Q₁ = s²/4` and `Qₙ = −Σ_{k=1}^{n-1} B(Φₖ, Φ_{n-k})`,
//! `B(f,g) = f_s g_s + f_t g_t + (s/t)(f_s g_t + f_t g_s)`. In `(x = s², t)`
//! monomials `B(xᵃtᵇ, xᵃ'tᵇ')` is
//! `4aa' x^{a+a'-1} t^{b+b'} + (bb' + 2ab' + 2a'b) x^{a+a'} t^{b+b'-2}`,
//! which can produce `t⁻¹` terms; those are handed to the solver separately.

use super::operator::{invert, Grid, OperatorShape};
use super::arith::RatArith;
use rug::{Integer, Rational};

/// A correction stored with a common denominator for fast products.
#[derive(Clone, Debug)]
pub(crate) struct ScaledPhase {
    pub den: Integer,
    pub num: Vec<Vec<Integer>>,
}

impl ScaledPhase {
    pub fn from_grid(g: &Grid<Rational>) -> Self {
        let mut den = Integer::from(1);
        for row in &g.rows {
            for v in row {
                den.lcm_mut(v.denom());
            }
        }
        let num = g
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| Integer::from(v.numer() * Integer::from(&den / v.denom())))
                    .collect()
            })
            .collect();
        ScaledPhase { den, num }
    }
}

/// Accumulates `B(f, g)` (times `weight`) into integer tables sharing the
/// denominator `f.den * g.den`.
fn gradient_product(
    f: &ScaledPhase,
    g: &ScaledPhase,
    weight: i64,
    poly: &mut Vec<Vec<Integer>>,
    neg: &mut Vec<Integer>,
) {
    let mut tmp = Integer::new();
    for (a, frow) in f.num.iter().enumerate() {
        for (b, fv) in frow.iter().enumerate() {
            if fv.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            for (a2, grow) in g.num.iter().enumerate() {
                for (b2, gv) in grow.iter().enumerate() {
                    if gv.cmp0() == std::cmp::Ordering::Equal {
                        continue;
                    }
                    let (ai, bi, a2i, b2i) = (a as i64, b as i64, a2 as i64, b2 as i64);
                    let k1 = 4 * ai * a2i;
                    let k2 = bi * b2i + 2 * ai * b2i + 2 * a2i * bi;
                    if k1 == 0 && k2 == 0 {
                        continue;
                    }
                    tmp.assign_mul(fv, gv);
                    if k1 != 0 {
                        let (ta, tb) = (a + a2 - 1, b + b2);
                        grow_to(poly, ta, tb);
                        poly[ta][tb] += Integer::from(&tmp * (k1 * weight));
                    }
                    if k2 != 0 {
                        let ta = a + a2;
                        let tb = b as i64 + b2 as i64 - 2;
                        let term = Integer::from(&tmp * (k2 * weight));
                        if tb < 0 {
                            debug_assert_eq!(tb, -1);
                            if neg.len() <= ta {
                                neg.resize(ta + 1, Integer::new());
                            }
                            neg[ta] += term;
                        } else {
                            grow_to(poly, ta, tb as usize);
                            poly[ta][tb as usize] += term;
                        }
                    }
                }
            }
        }
    }
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Integer, b: &Integer);
}

impl AssignMul for Integer {
    fn assign_mul(&mut self, a: &Integer, b: &Integer) {
        use rug::Assign;
        self.assign(a * b);
    }
}

fn grow_to<T: Clone + Default>(t: &mut Vec<Vec<T>>, a: usize, b: usize) {
    if t.len() <= a {
        t.resize(a + 1, Vec::new());
    }
    if t[a].len() <= b {
        t[a].resize(b + 1, T::default());
    }
}

/// `Qₙ` for `n ≥ 2` as (polynomial part, `t⁻¹` row), from the scaled lower orders.
pub(crate) fn source_term(lower: &[ScaledPhase], n: usize) -> (Grid<Rational>, Vec<Rational>) {
    let mut poly: Grid<Rational> = Grid::new();
    let mut neg: Vec<Rational> = Vec::new();
    if n == 1 {
        poly.ensure(1, 0, &Rational::new());
        poly.rows[1][0] = Rational::from((1, 4));
        return (poly, neg);
    }
    for k in 1..=n / 2 {
        let m = n - k;
        // B is symmetric: count the pair (k, m) twice unless k == m.
        let weight = if k == m { -1 } else { -2 };
        let mut ip: Vec<Vec<Integer>> = Vec::new();
        let mut ineg: Vec<Integer> = Vec::new();
        gradient_product(&lower[k], &lower[m], weight, &mut ip, &mut ineg);
        let den = Integer::from(&lower[k].den * &lower[m].den);
        for (a, row) in ip.into_iter().enumerate() {
            for (b, v) in row.into_iter().enumerate() {
                if v.cmp0() != std::cmp::Ordering::Equal {
                    poly.ensure(a, b, &Rational::new());
                    poly.rows[a][b] += Rational::from((v, den.clone()));
                }
            }
        }
        for (a, v) in ineg.into_iter().enumerate() {
            if v.cmp0() != std::cmp::Ordering::Equal {
                if neg.len() <= a {
                    neg.resize(a + 1, Rational::new());
                }
                neg[a] += Rational::from((v, den.clone()));
            }
        }
    }
    (poly, neg)
}

/// One step of the phase recursion: returns `(Φₙ, εₙ)`.
pub(crate) fn step(shape: OperatorShape, lower: &[ScaledPhase], n: usize) -> (Grid<Rational>, Rational) {
    let (q, q_neg) = source_term(lower, n);
    let q00 = q.get(0, 0, &Rational::new()).clone();
    let (phi, lhs00) = invert(&RatArith, shape, &q, &q_neg);
    let eps = Rational::from(&q00 - &lhs00);
    (phi, eps)
}
