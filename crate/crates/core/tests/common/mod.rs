#![allow(clippy::manual_is_multiple_of)]

//! Shared test oracles: brute-force midpoint panel integration and a
//! deterministic RNG. These stay independent of the library's
//! quadrature path.

#![allow(dead_code)]

/// Composite midpoint rule with `n` panels.
pub fn midpoint_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += f(a + (i as f64 + 0.5) * h);
    }
    acc * h
}

/// Midpoint panels on `t1 in [a, b]`, inner midpoint panels on
/// `t2 in [inner_lo(t1), inner_hi(t1)]`.
pub fn midpoint_2d(
    integrand: impl Fn(f64, f64) -> f64,
    a: f64,
    b: f64,
    inner_lo: impl Fn(f64) -> f64,
    inner_hi: impl Fn(f64) -> f64,
    n_outer: usize,
    n_inner: usize,
) -> f64 {
    let h = (b - a) / n_outer as f64;
    let mut acc = 0.0;
    for i in 0..n_outer {
        let t1 = a + (i as f64 + 0.5) * h;
        let (lo, hi) = (inner_lo(t1), inner_hi(t1));
        if hi > lo {
            acc += h * midpoint_1d(|t2| integrand(t1, t2), lo, hi, n_inner);
        }
    }
    acc
}

/// xorshift64*: deterministic pseudo-random stream for test inputs.
pub struct XorShift {
    state: u64,
}

impl XorShift {
    pub fn new(seed: u64) -> Self {
        XorShift {
            state: seed.max(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_u64(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next_u64() % (hi - lo + 1)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Full Ω(n) by trial division; independent of the factor sieve.
pub fn omega_trial(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2u64;
    while p * p <= n {
        while n % p == 0 {
            n /= p;
            count += 1;
        }
        p += 1;
    }
    if n > 1 {
        count += 1;
    }
    count
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
