//! Upper and lower linear-sieve functions `F(u)`, `f(u)`.
//!
//! Closed forms used here, with `g = 2 e^γ`:
//!
//! ```text
//! F(u) = g/u                                  0 < u <= 3
//! F(u) = g/u (1 + ∫_2^{u-1} log(t-1)/t dt)    3 <  u <= 5
//! f(u) = 0                                    1 <= u <= 2
//! f(u) = g/u log(u-1)                         2 <  u <  4
//! f(u) = g/u (log(u-1)
//!         + ∫_3^{u-1} dt1/t1 ∫_2^{t1-1} log(t2-1)/t2 dt2)   4 <= u <= 6
//! ```
//!
//! The pair solves the coupled delay system `(uF(u))' = f(u-1)`,
//! `(uf(u))' = F(u-1)`; the `2 < u < 4` branch of `f` is the standard
//! continuation consistent with that system and with `F = g/u` below 3.
//! Evaluation outside the stated `u` ranges is refused, not extrapolated.

use std::collections::HashMap;
use std::sync::RwLock;

use once_cell::sync::Lazy;
use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{integrate, integrate_nested, Estimate, Interval, QuadConfig, QuadError};

/// Euler's constant, 40 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431_042;

static EXP_GAMMA: Lazy<f64> = Lazy::new(|| EULER_GAMMA.exp());

/// `e^γ`, computed once from [`EULER_GAMMA`].
pub fn exp_gamma() -> f64 {
    *EXP_GAMMA
}

#[derive(Debug, Error)]
pub enum SieveFnError {
    #[error("u = {u} outside supported range [{lo}, {hi}]")]
    Domain { u: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// One row of the `u, F(u), f(u)` table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SieveFnPoint {
    pub u: f64,
    pub upper: f64,
    pub lower: f64,
    pub err: f64,
}

type Cache = Lazy<RwLock<HashMap<(i64, u64), Estimate>>>;
static UPPER_CACHE: Cache = Lazy::new(|| RwLock::new(HashMap::new()));
static LOWER_CACHE: Cache = Lazy::new(|| RwLock::new(HashMap::new()));

// memo key: u quantized to 1e-12 so sweep stencils reuse entries
fn cache_key(u: f64, cfg: &QuadConfig) -> (i64, u64) {
    ((u * 1e12).round() as i64, cfg.abs_tol.to_bits())
}

fn cached(cache: &Cache, key: (i64, u64)) -> Option<Estimate> {
    cache.read().expect("sieve fn cache poisoned").get(&key).copied()
}

fn store(cache: &Cache, key: (i64, u64), est: Estimate) {
    cache.write().expect("sieve fn cache poisoned").insert(key, est);
}

// error slack for the closed-form branches: constant precision only
fn fp_err(value: f64) -> f64 {
    4.0 * f64::EPSILON * value.abs()
}

/// ∫_2^v log(t-1)/t dt; zero for v <= 2. The integrand is continuous at
/// t = 2 (log 1 = 0), no endpoint handling needed.
fn log_kernel(v: f64, cfg: QuadConfig) -> Result<Estimate, QuadError> {
    if v <= 2.0 {
        return Ok(Estimate::ZERO);
    }
    integrate(|t| (t - 1.0).ln() / t, Interval { lo: 2.0, hi: v }, cfg)
}

/// Upper sieve function `F(u)` with a certified error bound, `0 < u <= 5`.
pub fn upper_f(u: f64, cfg: QuadConfig) -> Result<Estimate, SieveFnError> {
    if !(u > 0.0 && u <= 5.0) {
        return Err(SieveFnError::Domain { u, lo: 0.0, hi: 5.0 });
    }
    let key = cache_key(u, &cfg);
    if let Some(est) = cached(&UPPER_CACHE, key) {
        return Ok(est);
    }
    let g = 2.0 * exp_gamma();
    let est = if u <= 3.0 {
        let value = g / u;
        Estimate {
            value,
            err: fp_err(value),
        }
    } else {
        let tail = log_kernel(u - 1.0, cfg)?;
        let scale = g / u;
        let value = scale * (1.0 + tail.value);
        Estimate {
            value,
            err: scale * tail.err + fp_err(value),
        }
    };
    store(&UPPER_CACHE, key, est);
    Ok(est)
}

/// Lower sieve function `f(u)` with a certified error bound, `1 <= u <= 6`.
pub fn lower_f(u: f64, cfg: QuadConfig) -> Result<Estimate, SieveFnError> {
    if !(1.0..=6.0).contains(&u) {
        return Err(SieveFnError::Domain { u, lo: 1.0, hi: 6.0 });
    }
    if u <= 2.0 {
        return Ok(Estimate::ZERO);
    }
    let key = cache_key(u, &cfg);
    if let Some(est) = cached(&LOWER_CACHE, key) {
        return Ok(est);
    }
    let g = 2.0 * exp_gamma();
    let scale = g / u;
    let est = if u < 4.0 {
        let value = scale * (u - 1.0).ln();
        Estimate {
            value,
            err: fp_err(value),
        }
    } else {
        let dbl = integrate_nested(
            |t1, v| v / t1,
            |t1| Interval {
                lo: 2.0,
                hi: t1 - 1.0,
            },
            |_, t2| (t2 - 1.0).ln() / t2,
            Interval {
                lo: 3.0,
                hi: u - 1.0,
            },
            cfg,
        )?;
        let value = scale * ((u - 1.0).ln() + dbl.value);
        Estimate {
            value,
            err: scale * dbl.err + fp_err(value),
        }
    };
    store(&LOWER_CACHE, key, est);
    Ok(est)
}

/// Both sieve functions at `u`, defined on the overlap `1 <= u <= 5`.
pub fn point(u: f64, cfg: QuadConfig) -> Result<SieveFnPoint, SieveFnError> {
    if !(1.0..=5.0).contains(&u) {
        return Err(SieveFnError::Domain { u, lo: 1.0, hi: 5.0 });
    }
    let upper = upper_f(u, cfg)?;
    let lower = lower_f(u, cfg)?;
    debug_assert!(upper.value >= lower.value && lower.value >= 0.0);
    debug_assert!(u > 2.0 || lower.value == 0.0);
    Ok(SieveFnPoint {
        u,
        upper: upper.value,
        lower: lower.value,
        err: upper.err.max(lower.err),
    })
}

/// Worst central-difference residuals of the delay system on a grid.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OdeResiduals {
    /// max over `u` in `(3, 5)` of `|d(uF)/du - f(u-1)|`
    pub upper_system: f64,
    /// max over `u` in `(2, 5)` of `|d(uf)/du - F(u-1)|`
    pub lower_system: f64,
}

impl OdeResiduals {
    pub fn max(&self) -> f64 {
        self.upper_system.max(self.lower_system)
    }
}

/// Check `(uF(u))' = f(u-1)` and `(uf(u))' = F(u-1)` by central
/// differences at step `grid_step` on the grid `{3 + k·grid_step}`.
/// Residuals are `O(grid_step²)` plus quadrature tolerance; evaluation
/// runs at `abs_tol = 1e-12` because differencing divides the
/// evaluation error by the step.
pub fn ode_residuals(grid_step: f64) -> OdeResiduals {
    assert!(
        grid_step > 0.0 && grid_step <= 0.01,
        "grid_step must lie in (0, 0.01]"
    );
    let h = grid_step;
    let cfg = QuadConfig::with_tol(1e-12);

    // points are grid indices k with u = 3 + k h; stencil u ± h must stay
    // inside each function's domain
    let upper_ks: Vec<i64> = (1..)
        .take_while(|&k| 3.0 + k as f64 * h + h <= 5.0)
        .collect();
    let lo_k = -((1.0 / h).ceil() as i64 - 1);
    let lower_ks: Vec<i64> = (lo_k..)
        .take_while(|&k| 3.0 + k as f64 * h + h <= 5.0)
        .filter(|&k| 3.0 + k as f64 * h > 2.0)
        .collect();

    let upper_res = crate::exec::map_collect(crate::exec::Mode::default(), &upper_ks, |&k| {
        let u = 3.0 + k as f64 * h;
        let hi = upper_f(u + h, cfg).expect("in range");
        let lo = upper_f(u - h, cfg).expect("in range");
        let deriv = ((u + h) * hi.value - (u - h) * lo.value) / (2.0 * h);
        let target = lower_f(u - 1.0, cfg).expect("in range");
        (deriv - target.value).abs()
    });
    let lower_res = crate::exec::map_collect(crate::exec::Mode::default(), &lower_ks, |&k| {
        let u = 3.0 + k as f64 * h;
        let hi = lower_f(u + h, cfg).expect("in range");
        let lo = lower_f(u - h, cfg).expect("in range");
        let deriv = ((u + h) * hi.value - (u - h) * lo.value) / (2.0 * h);
        let target = upper_f(u - 1.0, cfg).expect("in range");
        (deriv - target.value).abs()
    });

    OdeResiduals {
        upper_system: upper_res.into_iter().fold(0.0, f64::max),
        lower_system: lower_res.into_iter().fold(0.0, f64::max),
    }
}
