//! Segmented factor sieve: exact `Ω(n)` and least-prime-factor tables.

use thiserror::Error;

use crate::exec::{self, Mode};

/// Integers per sieve segment; segments stay cache-resident.
pub const SEGMENT_WIDTH: u64 = 1 << 20;
/// Largest table (in entries) a single call may materialize.
pub const MAX_TABLE_ENTRIES: u64 = 1 << 25;
/// Hard cap on the sieved range.
pub const MAX_RANGE_END: u64 = 10_000_000_000;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("invalid range [{start}, {end}]: need 2 <= start <= end <= {MAX_RANGE_END}")]
    InvalidRange { start: u64, end: u64 },
    #[error("range of {entries} entries exceeds the {MAX_TABLE_ENTRIES}-entry memory budget")]
    RangeTooLarge { entries: u64 },
}

/// Exact `Ω(n)` (prime factors with multiplicity) and least prime
/// factor for every `n` in a contiguous range.
pub struct FactorTable {
    start: u64,
    omega: Vec<u8>,
    lpf: Vec<u64>,
}

impl FactorTable {
    pub fn range(&self) -> (u64, u64) {
        (self.start, self.start + self.omega.len() as u64 - 1)
    }

    /// Number of prime factors of `n`, counted with multiplicity.
    /// Panics if `n` is outside the table range.
    pub fn omega(&self, n: u64) -> u8 {
        self.omega[(n - self.start) as usize]
    }

    /// Least prime factor of `n` (`n` itself when prime).
    pub fn lpf(&self, n: u64) -> u64 {
        self.lpf[(n - self.start) as usize]
    }

    /// Distinct prime factors of `n` with multiplicities, ascending.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        let (start, end) = self.range();
        assert!(n >= start && n <= end, "n = {n} outside table range");
        let mut out = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = if m >= start { self.lpf(m) } else { least_prime_factor(m) };
            let mut exp = 0u32;
            while m % p == 0 {
                m /= p;
                exp += 1;
            }
            out.push((p, exp));
        }
        out
    }
}

/// Simple sieve of Eratosthenes: all primes strictly below `limit`.
pub fn simple_primes(limit: u64) -> Vec<u64> {
    if limit <= 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n];
    let mut primes = Vec::new();
    for p in 2..n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m < n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Least prime factor by trial division.
pub fn least_prime_factor(n: u64) -> u64 {
    assert!(n >= 2);
    if n % 2 == 0 {
        return 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 2;
    }
    n
}

struct Segment {
    omega: Vec<u8>,
    lpf: Vec<u64>,
}

fn sieve_segment(lo: u64, hi: u64, base_primes: &[u64]) -> Segment {
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut omega = vec![0u8; len];
    let mut lpf = vec![0u64; len];
    for &p in base_primes {
        if p * p > hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            while rem[i] % p == 0 {
                rem[i] /= p;
                omega[i] += 1;
            }
            if lpf[i] == 0 {
                lpf[i] = p;
            }
            m += p;
        }
    }
    for i in 0..len {
        if rem[i] > 1 {
            omega[i] += 1;
            if lpf[i] == 0 {
                lpf[i] = rem[i];
            }
        }
    }
    Segment { omega, lpf }
}

/// Build the factor table for `[start, end]` by segmented sieving.
pub fn build_factor_table(start: u64, end: u64) -> Result<FactorTable, FactorError> {
    build_factor_table_with_mode(Mode::default(), start, end)
}

pub fn build_factor_table_with_mode(
    mode: Mode,
    start: u64,
    end: u64,
) -> Result<FactorTable, FactorError> {
    if !(2 <= start && start <= end && end <= MAX_RANGE_END) {
        return Err(FactorError::InvalidRange { start, end });
    }
    let entries = end - start + 1;
    if entries > MAX_TABLE_ENTRIES {
        return Err(FactorError::RangeTooLarge { entries });
    }
    let root = (end as f64).sqrt() as u64 + 2;
    let base_primes = simple_primes(root + 1);

    let bounds: Vec<(u64, u64)> = (start..=end)
        .step_by(SEGMENT_WIDTH as usize)
        .map(|lo| (lo, (lo + SEGMENT_WIDTH - 1).min(end)))
        .collect();
    let segments = exec::map_collect(mode, &bounds, |&(lo, hi)| {
        sieve_segment(lo, hi, &base_primes)
    });

    let mut omega = Vec::with_capacity(entries as usize);
    let mut lpf = Vec::with_capacity(entries as usize);
    for seg in segments {
        omega.extend_from_slice(&seg.omega);
        lpf.extend_from_slice(&seg.lpf);
    }
    Ok(FactorTable { start, omega, lpf })
}
