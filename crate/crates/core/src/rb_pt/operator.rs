//! The linear operator shared by both perturbative recursions.
//!
//! With `x = s²` and the unperturbed phase `κt`, the order-n problem reads
//! `M f = R` where on monomials
//!
//! ```text
//! M xᵃtᵇ = 2κ(2a+b) xᵃtᵇ⁻¹ − 4a² xᵃ⁻¹tᵇ − b(4a+b−1+c) xᵃtᵇ⁻²
//! ```
//!
//! and `c = 2` for the ground state, `c = 4` for the odd-parity state
//! (the extra `2/t ∂ₜ` from the `z` prefactor). `M` lowers the total degree
//! `2a+b` by one or two, so the system is triangular: sectors of fixed `a`
//! are solved from the highest `a` down, each from the highest `t`-power
//! down. The `t⁻¹` row of every sector fixes `f[a,0]`; in sector zero it
//! fixes `f[0,1]`, and the `t⁰` row of sector zero is the solvability
//! condition that determines the energy.

use super::arith::Arith;

/// Dense coefficient table `rows[a][b]` of `xᵃtᵇ`, `b ≥ 0`.
#[derive(Clone, Debug)]
pub(crate) struct Grid<E> {
    pub rows: Vec<Vec<E>>,
}

impl<E: Clone> Grid<E> {
    pub fn new() -> Self {
        Grid { rows: Vec::new() }
    }

    pub fn get<'a>(&'a self, a: usize, b: usize, zero: &'a E) -> &'a E {
        self.rows.get(a).and_then(|r| r.get(b)).unwrap_or(zero)
    }

    pub fn row_len(&self, a: usize) -> usize {
        self.rows.get(a).map_or(0, |r| r.len())
    }

    pub fn ensure(&mut self, a: usize, b: usize, zero: &E) {
        if self.rows.len() <= a {
            self.rows.resize(a + 1, Vec::new());
        }
        if self.rows[a].len() <= b {
            self.rows[a].resize(b + 1, zero.clone());
        }
    }
}

/// Parameters of `M` for one state: `twok = 2κ` and the drift constant `c`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct OperatorShape {
    pub twok: i64,
    pub c: i64,
}

/// Solves `M f = R` with `f[0,0] = 0`, skipping the sector-zero `t⁰` row.
///
/// `r_neg[a]` holds the `xᵃt⁻¹` coefficients of the right-hand side.
/// Returns `f` and the value of `(M f)[0,0]`, from which the caller extracts
/// the energy.
pub(crate) fn invert<A: Arith>(
    ar: &A,
    shape: OperatorShape,
    r: &Grid<A::E>,
    r_neg: &[A::E],
) -> (Grid<A::E>, A::E) {
    let zero = ar.zero();
    let OperatorShape { twok, c } = shape;
    let amax = r.rows.len().max(r_neg.len()).max(1) - 1;
    let mut f: Grid<A::E> = Grid { rows: vec![Vec::new(); amax + 2] };
    for a in (0..=amax).rev() {
        let top = r.row_len(a).max(f.row_len(a + 1));
        // f[a][b] for b in 0..=top+1 (top is one past the last rhs index).
        let mut row = vec![zero.clone(); top + 2];
        let ai = a as i64;
        for b in (0..top).rev() {
            if a == 0 && b == 0 {
                continue;
            }
            let bi = b as i64;
            let mut rhs = r.get(a, b, &zero).clone();
            let up = f.get(a + 1, b, &zero);
            if !ar.is_zero(up) {
                rhs = ar.add(&rhs, &ar.mul_small(up, 4 * (ai + 1) * (ai + 1)));
            }
            let right = &row[b + 2];
            if !ar.is_zero(right) {
                rhs = ar.add(&rhs, &ar.mul_small(right, (bi + 2) * (4 * ai + bi + 1 + c)));
            }
            if !ar.is_zero(&rhs) {
                row[b + 1] = ar.div_small(&rhs, twok * (2 * ai + bi + 1));
            }
        }
        let rn = r_neg.get(a).unwrap_or(&zero);
        if a >= 1 {
            let mut rhs = rn.clone();
            if !ar.is_zero(&row[1]) {
                rhs = ar.add(&rhs, &ar.mul_small(&row[1], 4 * ai + c));
            }
            if !ar.is_zero(&rhs) {
                row[0] = ar.div_small(&rhs, twok * 2 * ai);
            }
        } else if !ar.is_zero(rn) {
            row[1] = ar.div_small(&ar.sub(&zero, rn), c);
        }
        while row.last().is_some_and(|v| ar.is_zero(v)) {
            row.pop();
        }
        f.rows[a] = row;
    }
    while f.rows.last().is_some_and(|r| r.is_empty()) {
        f.rows.pop();
    }
    let f01 = f.get(0, 1, &zero).clone();
    let f10 = f.get(1, 0, &zero).clone();
    let f02 = f.get(0, 2, &zero).clone();
    let lhs00 = ar.sub(
        &ar.sub(&ar.mul_small(&f01, twok), &ar.mul_small(&f10, 4)),
        &ar.mul_small(&f02, 2 * (1 + c)),
    );
    (f, lhs00)
}

/// Applies `M` to `f`, returning the polynomial part and the `t⁻¹` row.
/// Used by tests as an independent check of [`invert`].
#[cfg(test)]
pub(crate) fn apply<A: Arith>(ar: &A, shape: OperatorShape, f: &Grid<A::E>) -> (Grid<A::E>, Vec<A::E>) {
    let zero = ar.zero();
    let OperatorShape { twok, c } = shape;
    let mut out: Grid<A::E> = Grid::new();
    let mut neg: Vec<A::E> = Vec::new();
    let push = |out: &mut Grid<A::E>, neg: &mut Vec<A::E>, a: usize, b: i64, v: A::E| {
        if b < 0 {
            if neg.len() <= a {
                neg.resize(a + 1, zero.clone());
            }
            neg[a] = ar.add(&neg[a], &v);
        } else {
            out.ensure(a, b as usize, &zero);
            let cell = &mut out.rows[a][b as usize];
            *cell = ar.add(cell, &v);
        }
    };
    for (a, row) in f.rows.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if ar.is_zero(v) {
                continue;
            }
            let (ai, bi) = (a as i64, b as i64);
            if 2 * ai + bi > 0 && bi >= 1 {
                push(&mut out, &mut neg, a, bi - 1, ar.mul_small(v, twok * (2 * ai + bi)));
            } else if bi == 0 && ai > 0 {
                // 2κ·2a·xᵃ/t
                push(&mut out, &mut neg, a, -1, ar.mul_small(v, twok * 2 * ai));
            }
            if a >= 1 {
                push(&mut out, &mut neg, a - 1, bi, ar.mul_small(v, -4 * ai * ai));
            }
            let k = bi * (4 * ai + bi - 1 + c);
            if k != 0 {
                push(&mut out, &mut neg, a, bi - 2, ar.mul_small(v, -k));
            }
        }
    }
    (out, neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rb_pt::arith::RatArith;
    use rug::Rational;

    #[test]
    fn invert_then_apply() {
        let ar = RatArith;
        for shape in [OperatorShape { twok: 2, c: 2 }, OperatorShape { twok: 1, c: 4 }] {
            let mut r: Grid<Rational> = Grid::new();
            let z = Rational::new();
            r.ensure(2, 3, &z);
            r.rows[2][3] = Rational::from((3, 7));
            r.ensure(1, 1, &z);
            r.rows[1][1] = Rational::from(-2);
            r.ensure(0, 4, &z);
            r.rows[0][4] = Rational::from((1, 5));
            let neg = vec![Rational::new(), Rational::from((2, 3))];
            let (f, lhs00) = invert(&ar, shape, &r, &neg);
            let (back, back_neg) = apply(&ar, shape, &f);
            assert_eq!(back.get(0, 0, &z), &lhs00);
            for a in 0..4 {
                for b in 0..8 {
                    if (a, b) != (0, 0) {
                        assert_eq!(back.get(a, b, &z), r.get(a, b, &z), "({a},{b})");
                    }
                }
                assert_eq!(back_neg.get(a).unwrap_or(&z), neg.get(a).unwrap_or(&z));
            }
        }
    }
}
