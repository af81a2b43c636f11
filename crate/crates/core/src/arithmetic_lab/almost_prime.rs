//! Least-P₂ search in arithmetic progressions and the desk-scale survey.
//!
//! A P₂ is an integer `n > 1` with `Ω(n) <= 2`: a prime, a semiprime,
//! or a prime square. `n = 1` never qualifies (it has no prime factor),
//! which changes records like `(a, q) = (1, 8)` from 1 to 9.

use serde::Serialize;
use thiserror::Error;

use crate::arithmetic_lab::factor::FactorError;
use crate::exec::{self, Mode};

/// Survey cap multiplier: a progression with no P₂ below `64 q²` would
/// already contradict far weaker classical bounds, so misses are
/// flagged rather than retried.
pub const SURVEY_CAP_FACTOR: u64 = 64;
/// Shared P₂ ladder bound used to accelerate surveys before falling
/// back to per-candidate trial division.
const LADDER_LIMIT: u64 = 1 << 22;
const MAX_SURVEY_Q: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum AlmostPrimeError {
    #[error("a = {a} and q = {q} are not coprime")]
    NonCoprimeInput { a: u64, q: u64 },
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("no P2 found in progression {a} mod {q} below cap {cap}")]
    NotFoundBelowCap { a: u64, q: u64, cap: u64 },
    #[error(transparent)]
    Factor(#[from] FactorError),
}

/// Least almost-prime in a reduced residue class.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlmostPrimeRecord {
    pub q: u64,
    pub a: u64,
    /// least `n > 1`, `n ≡ a (mod q)`, with `Ω(n) <= 2`
    pub n: u64,
    pub omega_n: u8,
    /// `log n / log q`
    pub ratio: f64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Some(Ω(n))` when `Ω(n) <= 2`, by trial division.
fn omega_at_most_two(n: u64) -> Option<u8> {
    debug_assert!(n >= 2);
    let p = super::factor::least_prime_factor(n);
    if p == n {
        return Some(1);
    }
    let m = n / p;
    if super::factor::least_prime_factor(m) == m {
        Some(2)
    } else {
        None
    }
}

/// Scan `n = a, a + q, a + 2q, ... <= cap`, `n > 1`, for the first
/// member with `Ω(n) <= 2`.
pub fn least_p2(a: u64, q: u64, cap: u64) -> Result<AlmostPrimeRecord, AlmostPrimeError> {
    if a == 0 || q == 0 || a > q {
        return Err(AlmostPrimeError::InvalidArgs(format!(
            "need 1 <= a <= q, got a = {a}, q = {q}"
        )));
    }
    if gcd(a, q) != 1 {
        return Err(AlmostPrimeError::NonCoprimeInput { a, q });
    }
    if cap < q {
        return Err(AlmostPrimeError::InvalidArgs(format!(
            "cap = {cap} below q = {q}"
        )));
    }
    let mut n = if a == 1 { 1 + q } else { a };
    while n <= cap {
        if let Some(omega_n) = omega_at_most_two(n) {
            return Ok(AlmostPrimeRecord {
                q,
                a,
                n,
                omega_n,
                ratio: (n as f64).ln() / (q as f64).ln(),
            });
        }
        n += q;
    }
    Err(AlmostPrimeError::NotFoundBelowCap { a, q, cap })
}

/// Worst residue class of one modulus.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SurveyRow {
    pub q: u64,
    /// residue whose least P₂ is largest
    pub worst_a: u64,
    pub p2: u64,
    pub ratio: f64,
    /// residues with no P₂ below the cap (flagged, never dropped)
    pub missing: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveySummary {
    pub theta: f64,
    pub rows: Vec<SurveyRow>,
    /// moduli whose worst ratio exceeds `theta`
    pub exceed_count: u64,
    pub max_ratio: f64,
    pub argmax_q: u64,
    pub argmax_a: u64,
    /// rows with at least one missing residue
    pub flagged: u64,
}

/// Shared ascending ladder of all P₂ values below the limit.
fn p2_ladder(mode: Mode, limit: u64) -> Result<Vec<u64>, FactorError> {
    let table = super::factor::build_factor_table_with_mode(mode, 2, limit)?;
    Ok((2..=limit).filter(|&n| table.omega(n) <= 2).collect())
}

fn survey_one(q: u64, cap: u64, ladder: &[u64]) -> SurveyRow {
    // coprime residue mask
    let mut coprime = vec![true; q as usize];
    coprime[0] = false;
    {
        let mut m = q;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                while m % p == 0 {
                    m /= p;
                }
                let mut r = 0u64;
                while r < q {
                    coprime[r as usize] = false;
                    r += p;
                }
            }
            p += 1;
        }
        if m > 1 {
            let mut r = 0u64;
            while r < q {
                coprime[r as usize] = false;
                r += m;
            }
        }
    }
    let phi = coprime.iter().filter(|&&c| c).count() as u64;

    let mut found = vec![0u64; q as usize];
    let mut remaining = phi;
    for &n in ladder {
        if n > cap {
            break;
        }
        let r = (n % q) as usize;
        if coprime[r] && found[r] == 0 {
            found[r] = n;
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
    }
    // fall back to direct scans for residues the ladder did not cover
    if remaining > 0 && cap > ladder.last().copied().unwrap_or(0) {
        for a in 1..q {
            if coprime[a as usize] && found[a as usize] == 0 {
                let start = ladder.last().copied().unwrap_or(1);
                let mut n = start - (start % q) + a;
                while n <= start {
                    n += q;
                }
                while n <= cap {
                    if omega_at_most_two(n).is_some() {
                        found[a as usize] = n;
                        remaining -= 1;
                        break;
                    }
                    n += q;
                }
            }
        }
    }

    let mut worst_a = 0u64;
    let mut worst_n = 0u64;
    #[allow(clippy::needless_range_loop)]
    for a in 0..q as usize {
        if found[a] > worst_n {
            worst_n = found[a];
            worst_a = a as u64;
        }
    }
    SurveyRow {
        q,
        worst_a,
        p2: worst_n,
        ratio: if worst_n > 0 && q >= 2 {
            (worst_n as f64).ln() / (q as f64).ln()
        } else {
            f64::NAN
        },
        missing: remaining,
    }
}

/// Worst-case least-P₂ survey over `q` in `[q_lo, q_hi]` with cap
/// `64 q²` per modulus. `theta` only classifies rows (ratio above or
/// below); it does not limit the search.
pub fn survey(q_lo: u64, q_hi: u64, theta: f64) -> Result<SurveySummary, AlmostPrimeError> {
    survey_with_mode(Mode::default(), q_lo, q_hi, theta)
}

pub fn survey_with_mode(
    mode: Mode,
    q_lo: u64,
    q_hi: u64,
    theta: f64,
) -> Result<SurveySummary, AlmostPrimeError> {
    if !(2 <= q_lo && q_lo <= q_hi && q_hi <= MAX_SURVEY_Q) {
        return Err(AlmostPrimeError::InvalidArgs(format!(
            "need 2 <= q_lo <= q_hi <= {MAX_SURVEY_Q}, got [{q_lo}, {q_hi}]"
        )));
    }
    // ladder sized to the expected worst record, not the cap; stragglers
    // use the trial-division fallback
    let ladder_limit = LADDER_LIMIT.min(SURVEY_CAP_FACTOR * q_hi * q_hi).max(1 << 16);
    let ladder = p2_ladder(mode, ladder_limit)?;

    let qs: Vec<u64> = (q_lo..=q_hi).collect();
    let rows = exec::map_collect(mode, &qs, |&q| {
        survey_one(q, SURVEY_CAP_FACTOR * q * q, &ladder)
    });

    let mut exceed_count = 0u64;
    let mut flagged = 0u64;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut argmax_q = 0u64;
    let mut argmax_a = 0u64;
    for row in &rows {
        if row.missing > 0 {
            flagged += 1;
        }
        if row.ratio > theta {
            exceed_count += 1;
        }
        if row.ratio > max_ratio {
            max_ratio = row.ratio;
            argmax_q = row.q;
            argmax_a = row.worst_a;
        }
    }
    Ok(SurveySummary {
        theta,
        rows,
        exceed_count,
        max_ratio,
        argmax_q,
        argmax_a,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_is_not_an_almost_prime() {
        // 1 mod 8: candidates 1 (excluded), 9 = 3²
        let rec = least_p2(1, 8, 100).unwrap();
        assert_eq!(rec.n, 9);
        assert_eq!(rec.omega_n, 2);
    }

    #[test]
    fn residue_itself_prime() {
        let rec = least_p2(3, 10, 100).unwrap();
        assert_eq!(rec.n, 3);
        assert_eq!(rec.omega_n, 1);
    }

    #[test]
    fn prime_square_record() {
        // 1 mod 24: 1 excluded, 25 = 5²
        let rec = least_p2(1, 24, 100).unwrap();
        assert_eq!(rec.n, 25);
    }

    #[test]
    fn rejects_non_coprime_and_bad_args() {
        assert!(matches!(
            least_p2(2, 8, 100),
            Err(AlmostPrimeError::NonCoprimeInput { .. })
        ));
        assert!(matches!(
            least_p2(9, 8, 100),
            Err(AlmostPrimeError::InvalidArgs(_))
        ));
        assert!(matches!(
            least_p2(1, 8, 4),
            Err(AlmostPrimeError::InvalidArgs(_))
        ));
    }

    #[test]
    fn not_found_reports_cap() {
        // 1 mod 8 has no P2 at or below 8
        match least_p2(1, 8, 8) {
            Err(AlmostPrimeError::NotFoundBelowCap { cap, .. }) => assert_eq!(cap, 8),
            other => panic!("expected NotFoundBelowCap, got {other:?}"),
        }
    }

    #[test]
    fn enlarging_cap_keeps_records() {
        for (a, q) in [(1, 8), (3, 10), (1, 24), (5, 12)] {
            let small = least_p2(a, q, 64 * q * q).unwrap();
            let large = least_p2(a, q, 256 * q * q).unwrap();
            assert_eq!(small.n, large.n);
        }
    }

    #[test]
    fn survey_small_range_has_no_gaps() {
        let s = survey(2, 50, 1.8345).unwrap();
        assert_eq!(s.rows.len(), 49);
        assert_eq!(s.flagged, 0);
        assert!(s.max_ratio.is_finite());
        let row8 = s.rows.iter().find(|r| r.q == 8).unwrap();
        assert_eq!(row8.worst_a, 1);
        assert_eq!(row8.p2, 9);
        let expect = 9f64.ln() / 8f64.ln();
        assert!((row8.ratio - expect).abs() < 1e-15);
    }

    #[test]
    fn survey_modes_agree() {
        let a = survey_with_mode(Mode::Sequential, 2, 40, 1.8).unwrap();
        let b = survey_with_mode(Mode::Parallel, 2, 40, 1.8).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.p2, y.p2);
            assert_eq!(x.ratio.to_bits(), y.ratio.to_bits());
        }
    }
}
