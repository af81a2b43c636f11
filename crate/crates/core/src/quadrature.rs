//! Deterministic adaptive quadrature with certified absolute-error bounds.
//!
//! The engine is a 7-point Gauss / 15-point Kronrod pair on adaptively
//! bisected panels. A panel is accepted once its rescaled error estimate
//! fits the local tolerance budget (halved on each split), so the sum of
//! accepted panel errors never exceeds the requested tolerance. The
//! reported bound is the sum of per-panel estimates, not the tolerance,
//! so it shrinks as the tolerance does.
//!
//! Everything here is pure `f64` arithmetic in a fixed evaluation order:
//! identical inputs give bit-identical outputs.

use serde::Serialize;
use thiserror::Error;

/// Closed integration interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, QuadError> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(QuadError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Tolerance and subdivision limits for one integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadConfig {
    /// Absolute error target for the whole interval.
    pub abs_tol: f64,
    /// Bisection depth cap.
    pub max_depth: u32,
    /// Panels narrower than this are closed with the midpoint rule.
    pub min_width: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            max_depth: 40,
            min_width: 1e-13,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadConfig {
            abs_tol,
            ..QuadConfig::default()
        }
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::InvalidConfig("abs_tol must be positive"));
        }
        if self.max_depth == 0 {
            return Err(QuadError::InvalidConfig("max_depth must be at least 1"));
        }
        if !(self.min_width > 0.0 && self.min_width.is_finite()) {
            return Err(QuadError::InvalidConfig("min_width must be positive"));
        }
        Ok(())
    }
}

/// A value together with a certified absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        err: 0.0,
    };
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo <= hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("depth cap hit before tolerance: best value {value} with bound {err}")]
    NonConvergence { value: f64, err: f64 },
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(&'static str),
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// QUADPACK-style inflation of the raw Kronrod-Gauss difference. Never
/// underestimates relative to the raw difference.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = raw.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Estimate {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0f64; 8];
    let mut fv2 = [0.0f64; 8];
    fv1[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let fsum = f1 + f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }
    // the 4th Gauss weight pairs with the center node
    res_gauss += WG[3] * f_center;

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let raw = (res_kronrod - res_gauss) * half;
    Estimate {
        value: res_kronrod * half,
        err: rescale_error(raw, res_abs * half.abs(), res_asc * half.abs()),
    }
}

struct Acc {
    value: f64,
    err: f64,
    depth_capped: bool,
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    cfg: &QuadConfig,
    acc: &mut Acc,
) {
    let width = hi - lo;
    if width < cfg.min_width {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        acc.value += fm * width;
        acc.err += width * fm.abs();
        return;
    }
    let panel = gk15(f, lo, hi);
    if panel.err <= tol {
        acc.value += panel.value;
        acc.err += panel.err;
        return;
    }
    if depth >= cfg.max_depth {
        acc.value += panel.value;
        acc.err += panel.err;
        acc.depth_capped = true;
        return;
    }
    let mid = 0.5 * (lo + hi);
    refine(f, lo, mid, 0.5 * tol, depth + 1, cfg, acc);
    refine(f, mid, hi, 0.5 * tol, depth + 1, cfg, acc);
}

/// Integrate `f` over `iv` to the absolute tolerance in `cfg`.
///
/// On success the reported bound satisfies
/// `|value - true integral| <= err <= cfg.abs_tol`. A degenerate
/// interval `[a, a]` yields `(0, 0)`. If the depth cap prevents the
/// tolerance from being met, the best estimate and its bound are
/// reported inside [`QuadError::NonConvergence`].
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    iv: Interval,
    cfg: QuadConfig,
) -> Result<Estimate, QuadError> {
    cfg.validate()?;
    if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
        return Err(QuadError::InvalidInterval {
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    if iv.lo == iv.hi {
        return Ok(Estimate::ZERO);
    }
    let mut acc = Acc {
        value: 0.0,
        err: 0.0,
        depth_capped: false,
    };
    refine(&f, iv.lo, iv.hi, cfg.abs_tol, 0, &cfg, &mut acc);
    if acc.err <= cfg.abs_tol {
        Ok(Estimate {
            value: acc.value,
            err: acc.err,
        })
    } else {
        Err(QuadError::NonConvergence {
            value: acc.value,
            err: acc.err,
        })
    }
}

/// Two-level integral `∫ outer(t1, J(t1)) dt1` with
/// `J(t1) = ∫ inner_f(t1, t2) dt2` over `inner_limits(t1)`.
///
/// `outer` must be 1-Lipschitz in its second argument (the integrands in
/// this crate are `v` or `v / t1` with `t1 >= 3`), so an inner error of
/// `e` perturbs the outer integrand by at most `e`. The inner tolerance
/// is `cfg.abs_tol / (10 * width)`, leaving the outer pass a 0.9
/// budget; the reported bound adds the worst-case inner contribution.
pub fn integrate_nested<O, L, G>(
    outer: O,
    inner_limits: L,
    inner_f: G,
    iv: Interval,
    cfg: QuadConfig,
) -> Result<Estimate, QuadError>
where
    O: Fn(f64, f64) -> f64,
    L: Fn(f64) -> Interval,
    G: Fn(f64, f64) -> f64,
{
    cfg.validate()?;
    if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
        return Err(QuadError::InvalidInterval {
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    if iv.lo == iv.hi {
        return Ok(Estimate::ZERO);
    }
    let width = iv.width();
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / (10.0 * width),
        ..cfg
    };
    let outer_cfg = QuadConfig {
        abs_tol: 0.9 * cfg.abs_tol,
        ..cfg
    };

    let inner_failure = std::cell::Cell::new(false);
    let g = |t1: f64| {
        let inner_iv = inner_limits(t1);
        let inner = match integrate(|t2| inner_f(t1, t2), inner_iv, inner_cfg) {
            Ok(est) => est.value,
            Err(QuadError::NonConvergence { value, .. }) => {
                inner_failure.set(true);
                value
            }
            Err(_) => {
                inner_failure.set(true);
                0.0
            }
        };
        outer(t1, inner)
    };

    let outer_est = integrate(g, iv, outer_cfg);
    let combine = |est: Estimate| Estimate {
        value: est.value,
        err: est.err + width * inner_cfg.abs_tol,
    };
    match outer_est {
        Ok(est) => {
            let total = combine(est);
            if inner_failure.get() || total.err > cfg.abs_tol {
                Err(QuadError::NonConvergence {
                    value: total.value,
                    err: total.err,
                })
            } else {
                Ok(total)
            }
        }
        Err(QuadError::NonConvergence { value, err }) => {
            let total = combine(Estimate { value, err });
            Err(QuadError::NonConvergence {
                value: total.value,
                err: total.err,
            })
        }
        Err(e) => Err(e),
    }
}
