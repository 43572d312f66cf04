//! Exact coefficient arithmetic shared by the perturbative engines: rationals
//! and Montgomery-form residues modulo a word-sized prime.

use rug::{Integer, Rational};

pub(crate) trait Arith {
    type E: Clone;
    fn zero(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul_small(&self, a: &Self::E, k: i64) -> Self::E;
    fn div_small(&self, a: &Self::E, k: i64) -> Self::E;
}

pub(crate) struct RatArith;

impl Arith for RatArith {
    type E = Rational;
    fn zero(&self) -> Rational {
        Rational::new()
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.cmp0() == std::cmp::Ordering::Equal
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        Rational::from(a + b)
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        Rational::from(a - b)
    }
    fn mul_small(&self, a: &Rational, k: i64) -> Rational {
        Rational::from(a * Integer::from(k))
    }
    fn div_small(&self, a: &Rational, k: i64) -> Rational {
        Rational::from(a / Integer::from(k))
    }
}

/// Arithmetic modulo an odd prime `p < 2^60`, values kept in Montgomery form
/// with `R = 2^64`. The headroom below `2^64` lets up to sixteen products be
/// summed in a `u128` before a single reduction.
#[derive(Clone, Debug)]
pub(crate) struct ModArith {
    pub p: u64,
    neg_pinv: u64,
    r2: u64,
    one: u64,
}

pub(crate) const LAZY_PRODUCTS: usize = 16;

impl ModArith {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1u64 << 60));
        // Newton iteration for p^{-1} mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r1 = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r1 as u128 * r1 as u128) % p as u128) as u64;
        ModArith { p, neg_pinv: inv.wrapping_neg(), r2, one: r1 }
    }

    #[inline(always)]
    pub fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_pinv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn mmul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn madd(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn msub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn to_mont(&self, a: u64) -> u64 {
        self.mmul(a % self.p, self.r2)
    }

    pub fn from_i64(&self, k: i64) -> u64 {
        let r = k.rem_euclid(self.p as i64) as u64;
        self.to_mont(r)
    }

    pub fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    pub fn one(&self) -> u64 {
        self.one
    }

    /// Montgomery form of `k^{-1}`.
    pub fn inv_small(&self, k: i64) -> u64 {
        let k = k.rem_euclid(self.p as i64) as i128;
        assert!(k != 0, "small divisor vanishes modulo the prime");
        let (mut r0, mut r1) = (self.p as i128, k);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        self.to_mont(t0.rem_euclid(self.p as i128) as u64)
    }
}

impl Arith for ModArith {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.madd(*a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.msub(*a, *b)
    }
    fn mul_small(&self, a: &u64, k: i64) -> u64 {
        self.mmul(*a, self.from_i64(k))
    }
    fn div_small(&self, a: &u64, k: i64) -> u64 {
        self.mmul(*a, self.inv_small(k))
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below `2^60`, in decreasing order.
pub(crate) struct PrimeStream {
    next: u64,
}

impl PrimeStream {
    pub fn new() -> Self {
        PrimeStream { next: (1u64 << 60) - 1 }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        while self.next > 3 {
            let c = self.next;
            self.next -= 2;
            if is_prime_u64(c) {
                return Some(c);
            }
        }
        None
    }
}

/// Non-negative remainder of `x` modulo `m > 0`.
pub(crate) fn modulo(x: &Integer, m: &Integer) -> Integer {
    let mut r = Integer::from(x % m);
    if r.cmp0() == std::cmp::Ordering::Less {
        r += m;
    }
    r
}

/// Wang's rational reconstruction: the unique `n/d` with `|n|, d ≤ √(M/2)`
/// congruent to `x` modulo `m`, if one exists.
pub(crate) fn rational_reconstruct(x: &Integer, m: &Integer) -> Option<Rational> {
    let bound = Integer::from(m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), modulo(&x, m));
    let (mut t0, mut t1) = (Integer::new(), Integer::from(1));
    while r1 > bound {
        let (q, r) = r0.div_rem_floor_ref(&r1).into();
        let q: Integer = q;
        r0 = std::mem::replace(&mut r1, r);
        let t2 = Integer::from(&t0 - &q * &t1);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let (mut num, mut den) = (r1, t1);
    if den.cmp0() == std::cmp::Ordering::Equal {
        return None;
    }
    if den.cmp0() == std::cmp::Ordering::Less {
        num = -num;
        den = -den;
    }
    if den > bound || Integer::from(num.gcd_ref(&den)) != 1 {
        return None;
    }
    Some(Rational::from((num, den)))
}

/// Residue of a rational modulo `p` (plain, not Montgomery form).
pub(crate) fn rational_mod(q: &Rational, p: u64) -> Option<u64> {
    let pi = Integer::from(p);
    let n = modulo(&q.numer(), &pi);
    let d = modulo(&q.denom(), &pi);
    let dinv = d.invert(&pi).ok()?;
    let r = Integer::from(n * dinv) % &pi;
    r.to_u64()
}
