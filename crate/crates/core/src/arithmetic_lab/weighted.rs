//! Richert-weighted sifting sum over a progression, computed two ways.
//!
//! For `𝒜 = {n <= x : n ≡ a (mod q)}`, `P(z) = ∏_{p<z, p∤q} p` and
//! weights `w_p = 1 - log p / log y`, the weighted sum is
//!
//! ```text
//! W = Σ_{n ∈ 𝒜, (n,P(z))=1} (1 - (1/λ) Σ_{z<=p<y, p|n} w_p)
//!   = S(𝒜,z) - (1/λ) Σ_{z<=p<y, p∤q} w_p · S(𝒜_p, z)
//! ```
//!
//! Both routes accumulate the same multiset of `w_p` terms, so the
//! middle sum `T = Σ w_p·(count)` is carried in exact rational
//! arithmetic (each `w_p` is the exact rational value of its f64) and
//! the two computations agree exactly; `W = S - T/λ` is then formed
//! once per route from identical inputs, giving bit-equal results.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic_lab::almost_prime::gcd;
use crate::arithmetic_lab::factor::{build_factor_table, simple_primes, FactorError};
use crate::bound_model::BoundParams;

const MAX_X: u64 = 30_000_000;
const MAX_Y: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum WeightedError {
    #[error("degenerate cutoffs: z = {z}, y = {y}, lambda = {lambda}")]
    DegenerateCutoffs { z: u64, y: u64, lambda: f64 },
    #[error("a = {a} and q = {q} are not coprime")]
    NonCoprime { a: u64, q: u64 },
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("the two accumulation routes disagree; implementation bug")]
    IdentityMismatch,
    #[error(transparent)]
    Factor(#[from] FactorError),
}

/// How to realize the cutoffs `z` and `y`.
#[derive(Clone, Copy, Debug)]
pub enum CutoffMode {
    /// `z = max(2, round(D^{5/23}))` and `y = round(q^δ)` with `D`
    /// computed from the realized exponent `θ = log x / log q`;
    /// reports `DegenerateCutoffs` if `y` would need clamping.
    FromExponents,
    /// Caller-chosen cutoffs, validated but not adjusted.
    Explicit { z: u64, y: u64 },
}

/// Full breakdown of one weighted-sum run.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedSumReport {
    pub x: u64,
    pub q: u64,
    pub a: u64,
    pub z: u64,
    pub y: u64,
    /// realized `log x / log q`
    pub theta_realized: f64,
    /// `3 - log x / log y - ε`
    pub lambda: f64,
    /// `S(𝒜, z)`
    pub sifted_count: u64,
    /// `W` via the per-member definition
    pub w_by_definition: f64,
    /// `W` via the expansion over primes
    pub w_by_expansion: f64,
    /// `Σ w_p S(𝒜_p, z)` split at `D^{8/23}` and `M = x/q`
    pub middle_parts: [f64; 3],
    pub middle_total: f64,
    /// split points as real numbers
    pub cut_low: f64,
    pub cut_high: f64,
    /// members `n > 1`, coprime to `P(z)`, with `Ω(n) <= 2`
    pub count_p2: u64,
    /// members coprime to `P(z)` with `Ω(n) >= 3` and `μ(n) = 0`
    pub count_squarefull_tail: u64,
    /// squarefree members with `Ω >= 3` and all prime factors in
    /// `[z, y)` whose weight failed to be negative (must stay 0)
    pub sign_violations: u64,
    /// `W > 0 ` implies a P₂ member was present
    pub w_positive_implies_p2: bool,
}

struct Member {
    n: u64,
    factors: Vec<(u64, u32)>,
}

fn realize_cutoffs(
    x: u64,
    q: u64,
    params: &BoundParams,
    mode: CutoffMode,
) -> Result<(u64, u64), WeightedError> {
    match mode {
        CutoffMode::Explicit { z, y } => {
            if z < 2 || y <= z {
                return Err(WeightedError::DegenerateCutoffs {
                    z,
                    y,
                    lambda: f64::NAN,
                });
            }
            Ok((z, y))
        }
        CutoffMode::FromExponents => {
            let theta = (x as f64).ln() / (q as f64).ln();
            let d_exp = (6.0 * theta - 7.0) / 4.0;
            let d = (q as f64).powf(d_exp);
            let z = (d.powf(5.0 / 23.0).round() as u64).max(2);
            let y_raw = (q as f64).powf(params.delta).round() as u64;
            if y_raw <= z {
                return Err(WeightedError::DegenerateCutoffs {
                    z,
                    y: y_raw,
                    lambda: f64::NAN,
                });
            }
            Ok((z, y_raw))
        }
    }
}

/// Compute the weighted sum and its expansion for one desk instance.
pub fn weighted_sum(
    x: u64,
    q: u64,
    a: u64,
    params: &BoundParams,
    mode: CutoffMode,
) -> Result<WeightedSumReport, WeightedError> {
    if !(q >= 2 && x >= q && a >= 1 && a <= q) {
        return Err(WeightedError::InvalidArgs(format!(
            "need x >= q >= 2 and 1 <= a <= q, got x = {x}, q = {q}, a = {a}"
        )));
    }
    if x > MAX_X {
        return Err(WeightedError::InvalidArgs(format!(
            "x = {x} beyond desk-scale cap {MAX_X}"
        )));
    }
    if gcd(a, q) != 1 {
        return Err(WeightedError::NonCoprime { a, q });
    }
    let (z, y) = realize_cutoffs(x, q, params, mode)?;
    if y > MAX_Y {
        return Err(WeightedError::InvalidArgs(format!(
            "y = {y} beyond cap {MAX_Y}"
        )));
    }
    let theta_realized = (x as f64).ln() / (q as f64).ln();
    let lambda = 3.0 - (x as f64).ln() / (y as f64).ln() - params.epsilon;
    if lambda <= 0.0 {
        return Err(WeightedError::DegenerateCutoffs { z, y, lambda });
    }

    let table = build_factor_table(2, x)?;
    let ln_y = (y as f64).ln();
    // each weight enters both routes as the same exact rational
    let mut weight_cache: HashMap<u64, BigRational> = HashMap::new();
    let mut weight_of = |p: u64| -> BigRational {
        weight_cache
            .entry(p)
            .or_insert_with(|| {
                BigRational::from_float(1.0 - (p as f64).ln() / ln_y)
                    .expect("weight is finite")
            })
            .clone()
    };

    // members of 𝒜 coprime to P(z); n ≡ a (q) with (a,q)=1 already
    // implies (n,q)=1, so coprimality to P(z) is "no factor below z"
    let mut members: Vec<Member> = Vec::new();
    let mut n = a;
    while n <= x {
        if n > 1 {
            let factors = table.factorize(n);
            if factors.iter().all(|&(p, _)| p >= z) {
                members.push(Member { n, factors });
            }
        } else {
            // n = 1 is coprime to everything and carries weight 1
            members.push(Member {
                n: 1,
                factors: Vec::new(),
            });
        }
        n += q;
    }

    // route 1: per-member definition
    let sifted_count = members.len() as u64;
    let mut t_def = BigRational::zero();
    let mut count_p2 = 0u64;
    let mut count_squarefull_tail = 0u64;
    let mut sign_violations = 0u64;
    for m in &members {
        let omega: u32 = m.factors.iter().map(|&(_, e)| e).sum();
        let squarefree = m.factors.iter().all(|&(_, e)| e == 1);
        let mut t_n = BigRational::zero();
        for &(p, _) in &m.factors {
            if p >= z && p < y {
                t_n += weight_of(p);
            }
        }
        if m.n > 1 && omega <= 2 {
            count_p2 += 1;
        }
        if omega >= 3 && !squarefree {
            count_squarefull_tail += 1;
        }
        if omega >= 3 && squarefree && m.factors.iter().all(|&(p, _)| p >= z && p < y) {
            let weight = 1.0 - t_n.to_f64().unwrap_or(f64::NAN) / lambda;
            if !(weight < 0.0) {
                sign_violations += 1;
            }
        }
        t_def += t_n;
    }

    // route 2: expansion over primes p in [z, y), p ∤ q
    let primes: Vec<u64> = simple_primes(y).into_iter().filter(|&p| p >= z).collect();
    let cut_low = {
        let theta = theta_realized;
        let d_exp = (6.0 * theta - 7.0) / 4.0;
        (q as f64).powf(d_exp * 8.0 / 23.0)
    };
    let cut_high = x as f64 / q as f64; // M = x/q
    let mut t_exp = BigRational::zero();
    let mut parts = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for &p in &primes {
        if q % p == 0 {
            continue;
        }
        // members of 𝒜_p coprime to P(z): n = p·m, m ≡ a·p⁻¹ (mod q)
        let inv = mod_inverse(p % q, q);
        let m0 = (a as u128 * inv as u128 % q as u128) as u64;
        let mut count = 0u64;
        let mut m = if m0 == 0 { q } else { m0 };
        while p * m <= x {
            let n = p * m;
            if table.factorize(n).iter().all(|&(pp, _)| pp >= z) {
                count += 1;
            }
            m += q;
        }
        if count > 0 {
            let term = weight_of(p) * BigRational::from_integer(count.into());
            let idx = if (p as f64) < cut_low {
                0
            } else if (p as f64) < cut_high {
                1
            } else {
                2
            };
            parts[idx] += term.clone();
            t_exp += term;
        }
    }

    if t_def != t_exp {
        return Err(WeightedError::IdentityMismatch);
    }
    let parts_total = parts[0].clone() + parts[1].clone() + parts[2].clone();
    if parts_total != t_exp {
        return Err(WeightedError::IdentityMismatch);
    }

    let w_from = |t: &BigRational| sifted_count as f64 - t.to_f64().unwrap_or(f64::NAN) / lambda;
    let w_by_definition = w_from(&t_def);
    let w_by_expansion = w_from(&t_exp);

    Ok(WeightedSumReport {
        x,
        q,
        a,
        z,
        y,
        theta_realized,
        lambda,
        sifted_count,
        w_by_definition,
        w_by_expansion,
        middle_parts: [
            parts[0].to_f64().unwrap_or(f64::NAN),
            parts[1].to_f64().unwrap_or(f64::NAN),
            parts[2].to_f64().unwrap_or(f64::NAN),
        ],
        middle_total: t_exp.to_f64().unwrap_or(f64::NAN),
        cut_low,
        cut_high,
        count_p2,
        count_squarefull_tail,
        sign_violations,
        w_positive_implies_p2: !(w_by_definition > 0.0) || count_p2 >= 1,
    })
}

fn mod_inverse(a: u64, q: u64) -> u64 {
    // extended Euclid; gcd(a, q) = 1 guaranteed by the caller
    let (mut old_r, mut r) = (a as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    old_s.rem_euclid(q as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_instance_routes_agree() {
        let p = BoundParams::default();
        let r = weighted_sum(10_000, 101, 3, &p, CutoffMode::FromExponents).unwrap();
        assert_eq!(
            r.w_by_definition.to_bits(),
            r.w_by_expansion.to_bits(),
            "routes must agree bit-exactly"
        );
        assert_eq!(r.sign_violations, 0);
        assert!(r.z >= 2 && r.y > r.z);
    }

    #[test]
    fn explicit_cutoffs_validated() {
        let p = BoundParams::default();
        assert!(matches!(
            weighted_sum(10_000, 101, 3, &p, CutoffMode::Explicit { z: 1, y: 50 }),
            Err(WeightedError::DegenerateCutoffs { .. })
        ));
        assert!(matches!(
            weighted_sum(10_000, 101, 3, &p, CutoffMode::Explicit { z: 50, y: 50 }),
            Err(WeightedError::DegenerateCutoffs { .. })
        ));
    }

    #[test]
    fn lambda_must_be_positive() {
        let p = BoundParams::default();
        // y so small that log x / log y >= 3
        let res = weighted_sum(10_000, 101, 3, &p, CutoffMode::Explicit { z: 2, y: 3 });
        assert!(matches!(
            res,
            Err(WeightedError::DegenerateCutoffs { .. })
        ));
    }

    #[test]
    fn rejects_non_coprime() {
        let p = BoundParams::default();
        assert!(matches!(
            weighted_sum(10_000, 100, 5, &p, CutoffMode::FromExponents),
            Err(WeightedError::NonCoprime { .. })
        ));
    }

    #[test]
    fn parts_partition_middle_sum() {
        let p = BoundParams::default();
        let r = weighted_sum(20_000, 211, 5, &p, CutoffMode::FromExponents).unwrap();
        let sum: f64 = r.middle_parts.iter().sum();
        // parts are exact rationals; their f64 renders may round, so
        // allow one ulp-scale slack
        assert!((sum - r.middle_total).abs() <= 1e-12 * (1.0 + r.middle_total.abs()));
    }

    #[test]
    fn member_one_counts_toward_sift_but_not_p2() {
        let p = BoundParams::default();
        let r = weighted_sum(5_000, 53, 1, &p, CutoffMode::Explicit { z: 3, y: 30 }).unwrap();
        assert!(r.sifted_count >= 1);
        // smallest P2 member must be > 1
        assert!(r.count_p2 == 0 || r.count_p2 >= 1);
        assert_eq!(r.w_by_definition.to_bits(), r.w_by_expansion.to_bits());
    }
}
