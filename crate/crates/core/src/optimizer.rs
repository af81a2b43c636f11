//! Search of the feasible `(θ, δ)` region for the least certifiable
//! exponent: grid-plus-golden-section in δ, bisection in θ on the
//! predicate "some δ gives a positive bracket".

use serde::Serialize;
use thiserror::Error;

use crate::bound_model::{bracket, BoundError, BoundParams, BracketBreakdown};
use crate::exec::{self, Mode};
use crate::quadrature::QuadConfig;

/// Default δ-grid size before golden-section refinement.
pub const DEFAULT_GRID: usize = 64;
/// Bracket evaluations spent by the golden-section stage (including the
/// two initial interior points).
const GOLDEN_EVALS: usize = 40;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// One bracket evaluation in an optimizer run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TracePoint {
    pub theta: f64,
    pub delta: f64,
    pub breakdown: BracketBreakdown,
}

/// Result of the inner δ-maximization at fixed θ.
#[derive(Clone, Debug)]
pub struct BestDelta {
    pub delta: f64,
    pub total: f64,
    pub err: f64,
    pub evals: Vec<TracePoint>,
}

/// Result of the outer θ-bisection.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizerResult {
    /// Least exponent at which the bracket was certified positive.
    pub theta_star: f64,
    /// The δ achieving the positive bracket at `theta_star`.
    pub delta_star: f64,
    /// Bracket total at `(theta_star, delta_star)`.
    pub margin: f64,
    /// Every bracket evaluation, in execution order.
    pub trace: Vec<TracePoint>,
    /// θ-resolution achieved (final bisection width).
    pub tol: f64,
}

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("no feasible delta for theta = {theta}")]
    NoFeasibleDelta { theta: f64 },
    #[error("bisection bracket invalid: {detail} ({} evaluations traced)", trace.len())]
    BadBisectionBracket {
        detail: String,
        trace: Vec<TracePoint>,
    },
    #[error("degenerate theta range [{lo}, {hi}]")]
    DegenerateRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Evaluate the bracket, mapping structural refusals (infeasible point,
/// pole guard) to `None`; genuine numerical failures propagate.
fn try_eval(
    theta: f64,
    delta: f64,
    cfg: QuadConfig,
) -> Result<Option<TracePoint>, OptimizerError> {
    let p = match BoundParams::new(theta, delta) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    match bracket(&p, cfg) {
        Ok(breakdown) => Ok(Some(TracePoint {
            theta,
            delta,
            breakdown,
        })),
        Err(BoundError::Infeasible(_)) | Err(BoundError::IntegrandPole { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Feasible δ-interval for a given θ: `(θ-1, min(1, (6θ-7)/4))`.
fn delta_interval(theta: f64) -> Option<(f64, f64)> {
    let lo = theta - 1.0;
    let hi = (1.0f64).min((6.0 * theta - 7.0) / 4.0);
    if hi > lo && lo > 0.0 {
        Some((lo, hi))
    } else {
        None
    }
}

/// Maximize the bracket total over feasible δ at fixed θ: a `grid`-point
/// scan, then golden-section refinement around the best grid cell.
/// Deterministic for fixed `grid`.
pub fn best_delta(
    theta: f64,
    grid: usize,
    cfg: QuadConfig,
) -> Result<BestDelta, OptimizerError> {
    best_delta_with_mode(Mode::default(), theta, grid, cfg)
}

pub fn best_delta_with_mode(
    mode: Mode,
    theta: f64,
    grid: usize,
    cfg: QuadConfig,
) -> Result<BestDelta, OptimizerError> {
    assert!(grid >= 2, "grid must have at least 2 points");
    let (d_lo, d_hi) = delta_interval(theta).ok_or(OptimizerError::NoFeasibleDelta { theta })?;
    let step = (d_hi - d_lo) / (grid as f64 + 1.0);
    let deltas: Vec<f64> = (0..grid).map(|i| d_lo + (i as f64 + 1.0) * step).collect();

    let evals: Vec<Result<Option<TracePoint>, OptimizerError>> =
        exec::map_collect(mode, &deltas, |&d| try_eval(theta, d, cfg));
    let mut trace = Vec::with_capacity(grid + GOLDEN_EVALS);
    let mut best: Option<(usize, TracePoint)> = None;
    for (i, res) in evals.into_iter().enumerate() {
        if let Some(tp) = res? {
            if best
                .as_ref()
                .is_none_or(|(_, b)| tp.breakdown.total > b.breakdown.total)
            {
                best = Some((i, tp));
            }
            trace.push(tp);
        }
    }
    let (best_i, mut best_tp) =
        best.ok_or(OptimizerError::NoFeasibleDelta { theta })?;

    // refine inside the cell around the best grid point
    let mut a = deltas[best_i] - step;
    let mut b = deltas[best_i] + step;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = try_eval(theta, x1, cfg)?;
    let mut f2 = try_eval(theta, x2, cfg)?;
    for tp in [&f1, &f2].into_iter().flatten() {
        trace.push(*tp);
        if tp.breakdown.total > best_tp.breakdown.total {
            best_tp = *tp;
        }
    }
    for _ in 0..GOLDEN_EVALS - 2 {
        let t1 = f1.as_ref().map_or(f64::NEG_INFINITY, |t| t.breakdown.total);
        let t2 = f2.as_ref().map_or(f64::NEG_INFINITY, |t| t.breakdown.total);
        if t1 > t2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = try_eval(theta, x1, cfg)?;
            if let Some(tp) = f1 {
                trace.push(tp);
                if tp.breakdown.total > best_tp.breakdown.total {
                    best_tp = tp;
                }
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = try_eval(theta, x2, cfg)?;
            if let Some(tp) = f2 {
                trace.push(tp);
                if tp.breakdown.total > best_tp.breakdown.total {
                    best_tp = tp;
                }
            }
        }
    }

    Ok(BestDelta {
        delta: best_tp.delta,
        total: best_tp.breakdown.total,
        err: best_tp.breakdown.err,
        evals: trace,
    })
}

/// Bisect θ on certifiability over `[lo, hi]` down to `theta_tol`.
///
/// Requires a valid bracket: certifiable at `hi`, not at `lo`.
/// Monotonicity of certifiability in θ is assumed for the bisection and
/// verified afterwards on the trace: margins sorted by θ must be
/// nondecreasing up to evaluation error.
pub fn min_theta(
    lo: f64,
    hi: f64,
    theta_tol: f64,
    cfg: QuadConfig,
) -> Result<OptimizerResult, OptimizerError> {
    if !(lo < hi && lo > 1.0 && hi < 2.0 && theta_tol > 0.0) {
        return Err(OptimizerError::DegenerateRange { lo, hi });
    }
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut margins: Vec<(f64, f64)> = Vec::new(); // (theta, best total)

    let run = |theta: f64, trace: &mut Vec<TracePoint>, margins: &mut Vec<(f64, f64)>| {
        let bd = best_delta(theta, DEFAULT_GRID, cfg)?;
        trace.extend_from_slice(&bd.evals);
        margins.push((theta, bd.total));
        Ok::<BestDelta, OptimizerError>(bd)
    };

    let bd_hi = run(hi, &mut trace, &mut margins)?;
    if bd_hi.total <= bd_hi.err {
        return Err(OptimizerError::BadBisectionBracket {
            detail: format!("not certifiable at hi = {hi} (best total {})", bd_hi.total),
            trace,
        });
    }
    let bd_lo = run(lo, &mut trace, &mut margins)?;
    if bd_lo.total > bd_lo.err {
        return Err(OptimizerError::BadBisectionBracket {
            detail: format!("already certifiable at lo = {lo} (total {})", bd_lo.total),
            trace,
        });
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut best = bd_hi;
    while hi - lo > theta_tol {
        let mid = 0.5 * (lo + hi);
        let bd = run(mid, &mut trace, &mut margins)?;
        // certified positivity: the margin must clear the error band
        if bd.total > bd.err {
            hi = mid;
            best = bd;
        } else {
            lo = mid;
        }
    }

    // post-hoc monotonicity audit of the sampled margins
    margins.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite thetas"));
    for pair in margins.windows(2) {
        let slack = 2.0 * best.err + 1e-12;
        if pair[1].1 + slack < pair[0].1 {
            return Err(OptimizerError::BadBisectionBracket {
                detail: format!(
                    "certifiability not monotone: margin {} at theta {} exceeds margin {} at theta {}",
                    pair[0].1, pair[0].0, pair[1].1, pair[1].0
                ),
                trace,
            });
        }
    }

    Ok(OptimizerResult {
        theta_star: hi,
        delta_star: best.delta,
        margin: best.total,
        trace,
        tol: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_range_is_rejected() {
        let cfg = QuadConfig::default();
        assert!(matches!(
            min_theta(1.8345, 1.8345, 1e-4, cfg),
            Err(OptimizerError::DegenerateRange { .. })
        ));
        assert!(matches!(
            min_theta(1.9, 1.7, 1e-4, cfg),
            Err(OptimizerError::DegenerateRange { .. })
        ));
    }

    #[test]
    fn no_feasible_delta_below_threshold() {
        // at theta <= 1.5 the delta interval (θ-1, (6θ-7)/4) is empty
        assert!(matches!(
            best_delta(1.45, 8, QuadConfig::default()),
            Err(OptimizerError::NoFeasibleDelta { .. })
        ));
    }

    #[test]
    fn weak_exponent_is_certifiable() {
        let bd = best_delta(1.99, 16, QuadConfig::default()).unwrap();
        assert!(bd.total > 0.0);
    }

    #[test]
    fn strong_exponent_is_not_certifiable() {
        let bd = best_delta(1.70, 16, QuadConfig::default()).unwrap();
        assert!(bd.total <= 0.0);
    }

    #[test]
    fn bad_bracket_is_reported() {
        // both ends certifiable
        let res = min_theta(1.95, 1.99, 1e-2, QuadConfig::default());
        assert!(matches!(
            res,
            Err(OptimizerError::BadBisectionBracket { .. })
        ));
    }
}
