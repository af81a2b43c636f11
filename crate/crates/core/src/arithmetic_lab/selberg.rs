//! Explicit Λ²-optimal upper-bound sieve weights for the
//! two-dimensional density `ω₁(d) = ∏_{p|d} (2 - 1/p)`.
//!
//! With `g(d) = ω₁(d)/d` and `h(p) = g(p)/(1 - g(p)) = (2p-1)/(p-1)²`,
//! the inner weights on squarefree `d | P(z)` with `d² < D₁` are
//!
//! ```text
//! λ_d = μ(d) · ∏_{p|d} (1 - g(p))⁻¹ · G_d / G,
//! G   = Σ_{m² < D₁, m|P(z)} h(m),
//! G_d = Σ_{(md)² < D₁, (m,d)=1, m|P(z)} h(m),
//! ```
//!
//! and `λ⁺(l) = Σ_{[d₁,d₂]=l} λ_{d₁} λ_{d₂}` is the level-`D₁` upper
//! sieve. Minimizing the quadratic form gives the exact identity
//! `Σ λ⁺(d) g(d) = 1/G`, which the constructor verifies — in exact
//! rational arithmetic when `D₁` is small enough, to 1e-12 otherwise.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic_lab::factor::simple_primes;
use crate::sieve_functions::EULER_GAMMA;

/// Levels up to this are built in exact rational arithmetic.
pub const RATIONAL_LEVEL_LIMIT: u64 = 10_000;
const MAX_LEVEL: u64 = 1_000_000;
/// The inequality checker enumerates prime subsets; more primes than
/// this below `z` exceed its table budget.
const MAX_CHECK_PRIMES: usize = 24;
const MAX_CHECK_N: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum SelbergError {
    #[error("level D1 = {d1} below z = {z}")]
    LevelBelowZ { z: u64, d1: u64 },
    #[error("arguments out of range: {0}")]
    OutOfRange(String),
    #[error("G-sum identity violated by {gap:e}; the construction is inconsistent")]
    IdentityCheckFailed { gap: f64 },
    #[error("sieve inequality violated at n = {n}: slack {slack}")]
    PropertyViolation { n: u64, slack: f64 },
    #[error("unsupported check: {0}")]
    UnsupportedCheck(String),
}

/// Scalar abstraction so the construction runs identically in exact
/// rational and floating arithmetic.
trait Field: Clone + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(n: u64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// An explicit Λ² system: level, cutoff, the λ⁺ map, and the exact
/// `G(D₁, z)` sum.
#[derive(Clone, Debug, Serialize)]
pub struct SelbergSystem {
    pub z: u64,
    pub level_d1: u64,
    /// `log D₁ / log z`
    pub s: f64,
    /// `d -> λ⁺(d)`, squarefree `d | P(z)`, `d < D₁`
    pub weights: BTreeMap<u64, f64>,
    /// `G(D₁, z)`
    pub g_sum: f64,
    /// `|Σ λ⁺ g - 1/G|`; exactly 0 in rational mode
    pub identity_gap: f64,
    /// whether the construction ran in exact rational arithmetic
    pub exact: bool,
    #[serde(skip)]
    weights_exact: Option<BTreeMap<u64, BigRational>>,
    #[serde(skip)]
    primes: Vec<u64>,
}

/// `ω₁(d) = ∏_{p|d} (2 - 1/p)` for squarefree `d`.
pub fn omega1_density(d: u64) -> f64 {
    let mut out = 1.0;
    let mut m = d;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            out *= 2.0 - 1.0 / p as f64;
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out *= 2.0 - 1.0 / m as f64;
    }
    out
}

struct Raw<T> {
    lambda_plus: BTreeMap<u64, T>,
    g_sum: T,
    gap: T,
}

fn factor_over(d: u64, primes: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = d;
    for &p in primes {
        if m == 1 {
            break;
        }
        if m % p == 0 {
            out.push(p);
            m /= p;
        }
    }
    debug_assert_eq!(m, 1, "support element {d} not P(z)-smooth");
    out
}

fn construct<T: Field>(d1: u64, primes: &[u64]) -> Raw<T> {
    // support: squarefree d | P(z) with d² < D1, ascending
    let mut support = vec![1u64];
    let mut stack = vec![(0usize, 1u64)];
    while let Some((idx, d)) = stack.pop() {
        for (j, &p) in primes.iter().enumerate().skip(idx) {
            let nd = d * p;
            if nd * nd >= d1 {
                break; // primes ascend, nothing further fits
            }
            support.push(nd);
            stack.push((j + 1, nd));
        }
    }
    support.sort_unstable();

    let g = |p: u64| T::from_u64(2 * p - 1).div(&T::from_u64(p * p));
    let h = |p: u64| T::from_u64(2 * p - 1).div(&T::from_u64((p - 1) * (p - 1)));

    let factors: Vec<Vec<u64>> = support.iter().map(|&d| factor_over(d, primes)).collect();
    let h_of: Vec<T> = factors
        .iter()
        .map(|fs| fs.iter().fold(T::one(), |acc, &p| acc.mul(&h(p))))
        .collect();
    let g_sum = h_of.iter().fold(T::zero(), |acc, v| acc.add(v));

    // λ_d = μ(d) Π_{p|d} (1-g(p))⁻¹ · G_d / G
    let lambda: Vec<T> = support
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut g_d = T::zero();
            for (j, &m) in support.iter().enumerate() {
                if (m * d) * (m * d) < d1 && crate::arithmetic_lab::almost_prime::gcd(m, d) == 1 {
                    g_d = g_d.add(&h_of[j]);
                }
            }
            // (1 - g(p))⁻¹ = p²/(p-1)²
            let inv = factors[i].iter().fold(T::one(), |acc, &p| {
                acc.mul(&T::from_u64(p * p).div(&T::from_u64((p - 1) * (p - 1))))
            });
            let signed = if factors[i].len() % 2 == 1 {
                T::zero().sub(&inv)
            } else {
                inv
            };
            signed.mul(&g_d).div(&g_sum)
        })
        .collect();

    let mut lambda_plus: BTreeMap<u64, T> = BTreeMap::new();
    for (i, &di) in support.iter().enumerate() {
        for (j, &dj) in support.iter().enumerate() {
            let l = di / crate::arithmetic_lab::almost_prime::gcd(di, dj) * dj;
            let term = lambda[i].mul(&lambda[j]);
            lambda_plus
                .entry(l)
                .and_modify(|acc| *acc = acc.add(&term))
                .or_insert(term);
        }
    }

    // minimized quadratic form: Σ λ⁺(l) g(l) must equal 1/G
    let lhs = lambda_plus.iter().fold(T::zero(), |acc, (&l, v)| {
        let gl = factor_over(l, primes)
            .iter()
            .fold(T::one(), |a, &p| a.mul(&g(p)));
        acc.add(&v.mul(&gl))
    });
    let gap = lhs.sub(&T::one().div(&g_sum));

    Raw {
        lambda_plus,
        g_sum,
        gap,
    }
}

/// Build the Λ²-optimal system at cutoff `z` and level `D₁`.
pub fn selberg_weights(z: u64, d1: u64) -> Result<SelbergSystem, SelbergError> {
    if !(2..=MAX_LEVEL).contains(&z) || d1 > MAX_LEVEL {
        return Err(SelbergError::OutOfRange(format!(
            "need 2 <= z <= D1 <= {MAX_LEVEL}, got z = {z}, D1 = {d1}"
        )));
    }
    if d1 < z {
        return Err(SelbergError::LevelBelowZ { z, d1 });
    }
    let primes = simple_primes(z);
    let exact = d1 <= RATIONAL_LEVEL_LIMIT;

    let (weights, weights_exact, g_sum, gap) = if exact {
        let raw = construct::<BigRational>(d1, &primes);
        if !raw.gap.is_zero() {
            return Err(SelbergError::IdentityCheckFailed {
                gap: raw.gap.to_f64_lossy(),
            });
        }
        let weights: BTreeMap<u64, f64> = raw
            .lambda_plus
            .iter()
            .map(|(&d, v)| (d, v.to_f64_lossy()))
            .collect();
        let g_sum = raw.g_sum.to_f64_lossy();
        (weights, Some(raw.lambda_plus), g_sum, 0.0)
    } else {
        let raw = construct::<f64>(d1, &primes);
        let gap = raw.gap.abs();
        if gap > 1e-12 {
            return Err(SelbergError::IdentityCheckFailed { gap });
        }
        (raw.lambda_plus.clone(), None, raw.g_sum, gap)
    };

    Ok(SelbergSystem {
        z,
        level_d1: d1,
        s: (d1 as f64).ln() / (z as f64).ln(),
        weights,
        g_sum,
        identity_gap: gap,
        exact,
        weights_exact,
        primes,
    })
}

impl SelbergSystem {
    /// `λ⁺(d)`; zero off the support.
    pub fn lambda_plus(&self, d: u64) -> f64 {
        self.weights.get(&d).copied().unwrap_or(0.0)
    }

    /// `𝒱(z) = ∏_{p<z} (1 - ω₁(p)/p) = ∏_{p<z} (1 - 1/p)²`.
    pub fn v_script(&self) -> f64 {
        self.primes
            .iter()
            .map(|&p| {
                let t = 1.0 - 1.0 / p as f64;
                t * t
            })
            .product()
    }

    /// `𝒱(z)/σ(s)` with `σ(s) = s²/(8 e^{2γ})`, defined for `s <= 2`.
    pub fn asymptotic_main(&self) -> Option<f64> {
        if self.s > 2.0 + 1e-12 {
            return None;
        }
        Some(self.v_script() * 8.0 * (2.0 * EULER_GAMMA).exp() / (self.s * self.s))
    }

    /// Ratio of the exact `1/G` to its asymptotic form; near 1 only up
    /// to `1 + O(1/log z)`.
    pub fn asymptotic_ratio(&self) -> Option<f64> {
        self.asymptotic_main().map(|m| (1.0 / self.g_sum) / m)
    }
}

/// Outcome of the upper-bound property sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SieveCheck {
    /// `min_n (Σ_{d|n} λ⁺(d) - Σ_{d|n} μ(d))`; 0 is attained at n = 1
    pub min_slack: f64,
    /// smallest `n` attaining the minimum
    pub witness: u64,
    /// distinct kernels examined
    pub kernels: u64,
    pub n_max: u64,
}

/// Verify `Σ_{d|n} μ(d) <= Σ_{d|n} λ⁺(d)` for every `n <= n_max`.
///
/// Both sides depend on `n` only through its kernel `m`: the product of
/// the distinct primes below `z` dividing `n` (`Σ_{d|n} μ(d)` is 1 for
/// `n = 1` and 0 otherwise; the λ⁺ support forces `d | m`). Every
/// kernel arising below `n_max` is itself a squarefree `P(z)`-smooth
/// integer `<= n_max`, and each such `m` arises at `n = m`, so sweeping
/// kernels covers all `n` exactly.
pub fn sieve_inequality_check(
    sys: &SelbergSystem,
    n_max: u64,
) -> Result<SieveCheck, SelbergError> {
    if !(1..=MAX_CHECK_N).contains(&n_max) {
        return Err(SelbergError::OutOfRange(format!(
            "need 1 <= n_max <= {MAX_CHECK_N}, got {n_max}"
        )));
    }
    if sys.primes.len() > MAX_CHECK_PRIMES {
        return Err(SelbergError::UnsupportedCheck(format!(
            "{} primes below z = {}; subset table supports at most {MAX_CHECK_PRIMES}",
            sys.primes.len(),
            sys.z
        )));
    }

    let prime_index = |p: u64| sys.primes.iter().position(|&q| q == p).expect("support prime");
    match &sys.weights_exact {
        Some(exact) => {
            let entries: Vec<(u32, BigRational)> = exact
                .iter()
                .map(|(&d, v)| {
                    let mask = factor_over(d, &sys.primes)
                        .iter()
                        .fold(0u32, |m, &p| m | 1 << prime_index(p));
                    (mask, v.clone())
                })
                .collect();
            sweep_kernels(sys, n_max, &entries, <BigRational as Zero>::zero(), |v| {
                v.to_f64_lossy()
            })
        }
        None => {
            let entries: Vec<(u32, f64)> = sys
                .weights
                .iter()
                .map(|(&d, &v)| {
                    let mask = factor_over(d, &sys.primes)
                        .iter()
                        .fold(0u32, |m, &p| m | 1 << prime_index(p));
                    (mask, v)
                })
                .collect();
            sweep_kernels(sys, n_max, &entries, 0.0, |v| *v)
        }
    }
}

fn sweep_kernels<T: Field>(
    sys: &SelbergSystem,
    n_max: u64,
    entries: &[(u32, T)],
    zero: T,
    render: impl Fn(&T) -> f64,
) -> Result<SieveCheck, SelbergError> {
    // enumerate kernels (mask, product) with product <= n_max
    let mut kernels: Vec<(u32, u64)> = vec![(0, 1)];
    let mut stack: Vec<(usize, u32, u64)> = vec![(0, 0, 1)];
    while let Some((idx, mask, prod)) = stack.pop() {
        for (j, &p) in sys.primes.iter().enumerate().skip(idx) {
            if prod.saturating_mul(p) > n_max {
                continue;
            }
            let nm = mask | 1 << j;
            kernels.push((nm, prod * p));
            stack.push((j + 1, nm, prod * p));
        }
    }

    let mut min_slack: Option<(T, u64)> = None;
    for &(mask, prod) in &kernels {
        let mut sum = zero.clone();
        for (emask, v) in entries {
            if emask & !mask == 0 {
                sum = sum.add(v);
            }
        }
        let mu_sum = if mask == 0 { T::one() } else { T::zero() };
        let slack = sum.sub(&mu_sum);
        let better = match &min_slack {
            None => true,
            Some((best, witness)) => {
                slack < *best || (slack == *best && prod < *witness)
            }
        };
        if better {
            min_slack = Some((slack, prod));
        }
    }
    let (slack, witness) = min_slack.expect("kernel 1 always present");
    let min_slack = render(&slack);
    if slack < zero {
        return Err(SelbergError::PropertyViolation {
            n: witness,
            slack: min_slack,
        });
    }
    Ok(SieveCheck {
        min_slack,
        witness,
        kernels: kernels.len() as u64,
        n_max,
    })
}
