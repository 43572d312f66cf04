//! Energy recursion through the wavefunction polynomials.
//!
//! Writing `ψ = e^{-κt} Σ λ²ⁿ Pₙ(s,t)` with `P₀ = 1` and `Pₙ(0,0) = 0` gives
//!
//! ```text
//! M Pₙ = εₙ + Σ_{k=1}^{n-1} εₖ P_{n-k} − (s²/4) P_{n-1}
//! ```
//!
//! which is linear in the unknowns, so order `n` costs `O(n³)` instead of the
//! `O(n⁵)` pairwise products of the phase recursion. The energies agree with
//! the phase route order by order (the wavefunction is `e^{-Φ}` expanded).
//!
//! Exact energies to high order come from running the recursion modulo many
//! 60-bit primes and lifting each `εₙ` by Chinese remaindering plus rational
//! reconstruction. A reconstructed value is accepted only after it also
//! matches the residues of a further batch of independent primes.

use super::arith::{modulo, rational_mod, rational_reconstruct, Arith, ModArith, PrimeStream, RatArith, LAZY_PRODUCTS};
use super::operator::{invert, Grid, OperatorShape};
use rug::ops::RemRounding;
use rug::{Integer, Rational};

/// Exact energies `ε₁..ε_N` with rational arithmetic throughout.
pub(crate) fn energies_rational(shape: OperatorShape, n_max: usize) -> Vec<Rational> {
    let ar = RatArith;
    let zero = Rational::new();
    let mut polys: Vec<Grid<Rational>> = vec![Grid { rows: vec![vec![Rational::from(1)]] }];
    let mut eps: Vec<Rational> = vec![Rational::new()];
    for n in 1..=n_max {
        let mut r: Grid<Rational> = Grid::new();
        for (a, row) in polys[n - 1].rows.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if !ar.is_zero(v) {
                    r.ensure(a + 1, b, &zero);
                    r.rows[a + 1][b] -= Rational::from(v / 4u32);
                }
            }
        }
        for k in 1..n {
            for (a, row) in polys[n - k].rows.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    if !ar.is_zero(v) {
                        r.ensure(a, b, &zero);
                        r.rows[a][b] += Rational::from(&eps[k] * v);
                    }
                }
            }
        }
        let (p, lhs00) = invert(&ar, shape, &r, &[]);
        let known = r.get(0, 0, &zero).clone();
        eps.push(Rational::from(&lhs00 - &known));
        polys.push(p);
    }
    eps.remove(0);
    eps
}

/// Flat storage of one `Pₙ` modulo a prime: row offsets into `data`.
struct FlatPoly {
    offs: Vec<usize>,
    data: Vec<u64>,
}

impl FlatPoly {
    fn from_grid(g: &Grid<u64>) -> Self {
        let mut offs = Vec::with_capacity(g.rows.len() + 1);
        let mut data = Vec::new();
        offs.push(0);
        for row in &g.rows {
            data.extend_from_slice(row);
            offs.push(data.len());
        }
        FlatPoly { offs, data }
    }

    fn rows(&self) -> usize {
        self.offs.len() - 1
    }

    fn row(&self, a: usize) -> &[u64] {
        if a + 1 >= self.offs.len() {
            return &[];
        }
        &self.data[self.offs[a]..self.offs[a + 1]]
    }
}

/// `ε₁..ε_N` modulo `p` (plain residues).
pub(crate) fn energies_mod(shape: OperatorShape, n_max: usize, p: u64) -> Vec<u64> {
    let ar = ModArith::new(p);
    let quarter = ar.inv_small(4);
    let mut polys: Vec<FlatPoly> = vec![FlatPoly { offs: vec![0, 1], data: vec![ar.one()] }];
    let mut eps: Vec<u64> = vec![0];
    for n in 1..=n_max {
        // Shape of the right-hand side: union of P_{n-1} shifted by x and all P_{n-k}.
        let prev = &polys[n - 1];
        let nrows = prev.rows() + 1;
        let mut lens = vec![0usize; nrows];
        for a in 0..nrows {
            let mut l = if a >= 1 { prev.row(a - 1).len() } else { 0 };
            for k in 1..n {
                l = l.max(polys[n - k].row(a).len());
            }
            lens[a] = l;
        }
        let mut acc: Vec<Vec<u128>> = lens.iter().map(|&l| vec![0u128; l]).collect();
        let mut val: Vec<Vec<u64>> = lens.iter().map(|&l| vec![0u64; l]).collect();
        let mut pending = 0usize;
        let flush = |acc: &mut Vec<Vec<u128>>, val: &mut Vec<Vec<u64>>| {
            for (ra, rv) in acc.iter_mut().zip(val.iter_mut()) {
                for (x, v) in ra.iter_mut().zip(rv.iter_mut()) {
                    if *x != 0 {
                        *v = ar.madd(*v, ar.redc(*x));
                        *x = 0;
                    }
                }
            }
        };
        for k in 1..n {
            let e = eps[k];
            let pk = &polys[n - k];
            for a in 0..pk.rows() {
                let src = pk.row(a);
                let dst = &mut acc[a];
                for (d, &s) in dst.iter_mut().zip(src.iter()) {
                    *d += e as u128 * s as u128;
                }
            }
            pending += 1;
            if pending == LAZY_PRODUCTS - 1 {
                flush(&mut acc, &mut val);
                pending = 0;
            }
        }
        let neg_quarter = ar.msub(0, quarter);
        for a in 0..prev.rows() {
            let dst = &mut acc[a + 1];
            for (d, &s) in dst.iter_mut().zip(prev.row(a).iter()) {
                *d += neg_quarter as u128 * s as u128;
            }
        }
        flush(&mut acc, &mut val);
        let r = Grid { rows: val };
        let (p_new, lhs00) = invert(&ar, shape, &r, &[]);
        let known = *r.get(0, 0, &0);
        eps.push(ar.msub(lhs00, known));
        polys.push(FlatPoly::from_grid(&p_new));
    }
    eps.iter().skip(1).map(|&e| ar.from_mont(e)).collect()
}

/// Incremental Chinese-remainder state for one unknown rational.
struct Lift {
    x: Integer,
    candidate: Option<Rational>,
    confirmations: usize,
    done: bool,
}

const BATCH: usize = 8;
const CONFIRM: usize = 8;

/// Exact `ε₁..ε_N` via multi-modular evaluation and rational reconstruction.
pub(crate) fn energies_multimodular(shape: OperatorShape, n_max: usize) -> Vec<Rational> {
    if n_max == 0 {
        return Vec::new();
    }
    let mut lifts: Vec<Lift> = (0..n_max)
        .map(|_| Lift { x: Integer::new(), candidate: None, confirmations: 0, done: false })
        .collect();
    let mut modulus = Integer::from(1);
    let mut primes = PrimeStream::new();
    let mut used = 0usize;
    loop {
        for _ in 0..BATCH {
            let p = primes.next().expect("ran out of 60-bit primes");
            let res = energies_mod(shape, n_max, p);
            let pi = Integer::from(p);
            let minv = modulo(&modulus, &pi)
                .invert(&pi)
                .expect("distinct primes are coprime");
            for (lift, &r) in lifts.iter_mut().zip(res.iter()) {
                if lift.done {
                    continue;
                }
                if let Some(c) = &lift.candidate {
                    if rational_mod(c, p) == Some(r) {
                        lift.confirmations += 1;
                        if lift.confirmations >= CONFIRM {
                            lift.done = true;
                        }
                    } else {
                        lift.candidate = None;
                        lift.confirmations = 0;
                    }
                }
                let xm = modulo(&lift.x, &pi);
                let h = Integer::from((Integer::from(r) - xm) * &minv).rem_euc(&pi);
                lift.x += Integer::from(&modulus * &h);
            }
            modulus *= &pi;
            used += 1;
        }
        let mut all_done = true;
        for lift in lifts.iter_mut() {
            if lift.done {
                continue;
            }
            all_done = false;
            if lift.candidate.is_none() {
                lift.candidate = rational_reconstruct(&lift.x, &modulus);
                lift.confirmations = 0;
            }
        }
        if all_done {
            break;
        }
        assert!(used < 100_000, "rational reconstruction failed to stabilise");
    }
    lifts.into_iter().map(|l| l.candidate.expect("accepted value")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GROUND: OperatorShape = OperatorShape { twok: 2, c: 2 };

    #[test]
    fn rational_route_low_orders() {
        let e = energies_rational(GROUND, 3);
        assert_eq!(e[0], Rational::from((1, 2)));
        assert_eq!(e[1], Rational::from((-53, 96)));
        assert_eq!(e[2], Rational::from((5581, 2304)));
    }

    #[test]
    fn modular_matches_rational() {
        let exact = energies_rational(GROUND, 14);
        let lifted = energies_multimodular(GROUND, 14);
        assert_eq!(exact, lifted);
        let odd = OperatorShape { twok: 1, c: 4 };
        assert_eq!(energies_rational(odd, 10), energies_multimodular(odd, 10));
    }
}
