//! Exact Euler products over primes below a cutoff, with their
//! asymptotic comparators.

use serde::Serialize;

use crate::arithmetic_lab::factor::{simple_primes, SEGMENT_WIDTH};
use crate::exec::{self, Mode};
use crate::sieve_functions::EULER_GAMMA;

pub const MAX_MERTENS_Z: u64 = 100_000_000;

/// `V(z) = ∏_{p<z} (1 - 1/p)` and the squared product
/// `𝒱(z) = ∏_{p<z} (1 - 1/p)² = V(z)²`, with the Mertens asymptotics
/// `e^{-γ}/log z` and `e^{-2γ}/log² z` for comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MertensProducts {
    pub z: u64,
    pub v: f64,
    /// exactly `v * v`
    pub v_cal: f64,
    pub v_asymptotic: f64,
    pub v_cal_asymptotic: f64,
}

/// Compute the products over `p < z`. Deterministic: the product is
/// folded per segment in ascending order, then across segments in
/// order, in both execution modes.
pub fn mertens_products(z: u64) -> MertensProducts {
    mertens_products_with_mode(Mode::default(), z)
}

pub fn mertens_products_with_mode(mode: Mode, z: u64) -> MertensProducts {
    assert!(
        (3..=MAX_MERTENS_Z).contains(&z),
        "z must lie in [3, {MAX_MERTENS_Z}]"
    );
    let root = (z as f64).sqrt() as u64 + 2;
    let base = simple_primes(root + 1);

    let bounds: Vec<(u64, u64)> = (2..z)
        .step_by(SEGMENT_WIDTH as usize)
        .map(|lo| (lo, (lo + SEGMENT_WIDTH - 1).min(z - 1)))
        .collect();
    let partials = exec::map_collect(mode, &bounds, |&(lo, hi)| {
        let mut acc = 1.0f64;
        for p in segment_primes(lo, hi, &base) {
            acc *= 1.0 - 1.0 / p as f64;
        }
        acc
    });
    let v = partials.into_iter().fold(1.0, |a, b| a * b);

    let ln_z = (z as f64).ln();
    MertensProducts {
        z,
        v,
        v_cal: v * v,
        v_asymptotic: (-EULER_GAMMA).exp() / ln_z,
        v_cal_asymptotic: (-2.0 * EULER_GAMMA).exp() / (ln_z * ln_z),
    }
}

/// Primes in `[lo, hi]` by segmented sieve against `base`.
fn segment_primes(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let mut m = (lo.div_ceil(p) * p).max(p * p);
        while m <= hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    (lo..=hi)
        .filter(|&n| n >= 2 && !composite[(n - lo) as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor() {
        let m = mertens_products(3);
        assert_eq!(m.v, 0.5);
        assert_eq!(m.v_cal, 0.25);
    }

    #[test]
    fn hand_product_below_eleven() {
        // (1/2)(2/3)(4/5)(6/7)(10/11) = 16/77
        let m = mertens_products(12);
        assert!((m.v - 16.0 / 77.0).abs() < 1e-15);
        // z = 11 excludes the prime 11
        let m11 = mertens_products(11);
        assert!((m11.v - 8.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn squared_product_is_bit_consistent() {
        let m = mertens_products(100_000);
        assert_eq!(m.v_cal.to_bits(), (m.v * m.v).to_bits());
    }

    #[test]
    fn modes_agree_bitwise() {
        let a = mertens_products_with_mode(Mode::Sequential, 3_000_000);
        let b = mertens_products_with_mode(Mode::Parallel, 3_000_000);
        assert_eq!(a.v.to_bits(), b.v.to_bits());
    }

    #[test]
    fn mertens_ratio_near_one() {
        let m = mertens_products(1_000_000);
        let ratio = m.v * (m.z as f64).ln() * EULER_GAMMA.exp();
        assert!(ratio > 0.99 && ratio < 1.01, "ratio {ratio}");
    }
}
