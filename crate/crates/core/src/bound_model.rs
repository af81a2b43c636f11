//! Exponent system and the final lower-bound bracket `B(θ, δ)`.
//!
//! With `x = q^θ` and `y = q^δ`, all scales are carried as exponents of
//! `q`: `M = q^{θ-1}`, `N = q^{θ/2-3/4}`, `D = MN = q^{(6θ-7)/4}`,
//! `z = D^{5/23}`, `D₁ = N²`, and `λ = 3 - θ/δ - ε`. The bracket
//!
//! ```text
//! B = main - corr1 - corr2 - corr3
//! ```
//!
//! is positive exactly when the sifting argument certifies that every
//! reduced residue class mod q contains an almost-prime P₂ below q^θ
//! (for large q), so `min { θ : B(θ, δ) > 0 for some δ }` is the
//! provable exponent.

use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{integrate, integrate_nested, Estimate, Interval, QuadConfig, QuadError};

/// Least margin allowed between the integrand pole at `β = (6θ-7)/4`
/// and the top of an integration range.
const POLE_MARGIN: f64 = 0.05;

/// The two free exponents, in units of `log q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    /// Target exponent: the progression is searched up to `x = q^θ`.
    pub theta: f64,
    /// Weight cutoff exponent: `y = q^δ`.
    pub delta: f64,
    /// Asymptotic slack; 0 evaluates the limiting bracket.
    pub epsilon: f64,
}

impl BoundParams {
    pub fn new(theta: f64, delta: f64) -> Result<Self, BoundError> {
        Self::with_epsilon(theta, delta, 0.0)
    }

    pub fn with_epsilon(theta: f64, delta: f64, epsilon: f64) -> Result<Self, BoundError> {
        if !(theta > 1.0 && theta < 2.0) {
            return Err(BoundError::InvalidParams(format!(
                "theta = {theta} outside (1, 2)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BoundError::InvalidParams(format!(
                "delta = {delta} outside (0, 1)"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(BoundError::InvalidParams(format!(
                "epsilon = {epsilon} must be finite and nonnegative"
            )));
        }
        Ok(BoundParams {
            theta,
            delta,
            epsilon,
        })
    }
}

impl Default for BoundParams {
    /// The headline parameter choice `θ = 1.8345`, `δ = 0.86`.
    fn default() -> Self {
        BoundParams {
            theta: 1.8345,
            delta: 0.86,
            epsilon: 0.0,
        }
    }
}

/// Derived exponents of `q` (at ε = 0; only `lambda` carries ε).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentSystem {
    /// `M = x/q`
    pub m_exp: f64,
    /// `N = x^{1/2} q^{-3/4}`
    pub n_exp: f64,
    /// level of distribution `D = MN`
    pub d_exp: f64,
    /// sifting cutoff `z = D^{5/23}`
    pub z_exp: f64,
    /// weight normalizer `λ = 3 - θ/δ - ε`
    pub lambda: f64,
    /// upper-sieve level `D₁ = N²`
    pub d1_exp: f64,
}

impl ExponentSystem {
    pub fn new(p: &BoundParams) -> Self {
        let m_exp = p.theta - 1.0;
        let n_exp = p.theta / 2.0 - 0.75;
        let d_exp = (6.0 * p.theta - 7.0) / 4.0;
        ExponentSystem {
            m_exp,
            n_exp,
            d_exp,
            z_exp: 5.0 / 23.0 * d_exp,
            lambda: 3.0 - p.theta / p.delta - p.epsilon,
            d1_exp: 2.0 * n_exp,
        }
    }
}

/// One structural constraint of the method that failed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InfeasibleReason {
    /// `M < y` fails: `θ - 1 >= δ`
    MNotBelowY { m_exp: f64, delta: f64 },
    /// `y < D` fails: `δ >= (6θ-7)/4`
    YNotBelowD { delta: f64, d_exp: f64 },
    /// `λ <= 0`: the weights lose their sign structure
    LambdaNotPositive { lambda: f64 },
    /// correction-integral limits out of order
    LimitsUnordered { lo: f64, mid: f64, hi: f64 },
    /// `D` degenerates: `(6θ-7)/4 <= 0`
    DExponentNotPositive { d_exp: f64 },
}

impl std::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InfeasibleReason::MNotBelowY { m_exp, delta } => {
                write!(f, "M < y fails: theta - 1 = {m_exp} >= delta = {delta}")
            }
            InfeasibleReason::YNotBelowD { delta, d_exp } => {
                write!(f, "y < D fails: delta = {delta} >= D-exponent = {d_exp}")
            }
            InfeasibleReason::LambdaNotPositive { lambda } => {
                write!(f, "lambda = {lambda} is not positive")
            }
            InfeasibleReason::LimitsUnordered { lo, mid, hi } => {
                write!(f, "correction limits unordered: {lo}, {mid}, {hi}")
            }
            InfeasibleReason::DExponentNotPositive { d_exp } => {
                write!(f, "D-exponent {d_exp} is not positive")
            }
        }
    }
}

/// Outcome of the structural feasibility check.
#[derive(Clone, Debug, Serialize)]
pub struct Feasibility {
    pub ok: bool,
    pub violations: Vec<InfeasibleReason>,
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible parameters: {}", format_reasons(.0))]
    Infeasible(Vec<InfeasibleReason>),
    #[error("integrand pole margin {margin} below {POLE_MARGIN} over the beta range")]
    IntegrandPole { margin: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

fn format_reasons(reasons: &[InfeasibleReason]) -> String {
    reasons
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Check the structural constraints at ε = 0, reporting every failure.
pub fn feasible(p: &BoundParams) -> Feasibility {
    let sys = ExponentSystem::new(&BoundParams {
        epsilon: 0.0,
        ..*p
    });
    let mut violations = Vec::new();
    if !(sys.m_exp < p.delta) {
        violations.push(InfeasibleReason::MNotBelowY {
            m_exp: sys.m_exp,
            delta: p.delta,
        });
    }
    if !(p.delta < sys.d_exp) {
        violations.push(InfeasibleReason::YNotBelowD {
            delta: p.delta,
            d_exp: sys.d_exp,
        });
    }
    if !(sys.lambda > 0.0) {
        violations.push(InfeasibleReason::LambdaNotPositive { lambda: sys.lambda });
    }
    let (lo, mid, hi) = beta_limits(p.theta);
    if !(lo < mid && mid < hi) {
        violations.push(InfeasibleReason::LimitsUnordered { lo, mid, hi });
    }
    if !(sys.d_exp > 0.0) {
        violations.push(InfeasibleReason::DExponentNotPositive { d_exp: sys.d_exp });
    }
    Feasibility {
        ok: violations.is_empty(),
        violations,
    }
}

fn require_feasible(p: &BoundParams) -> Result<(), BoundError> {
    feasible(p).ok_or_err()?;
    // with ε > 0 the shifted λ must stay positive as well
    let lambda = ExponentSystem::new(p).lambda;
    if lambda <= 0.0 {
        return Err(BoundError::Infeasible(vec![
            InfeasibleReason::LambdaNotPositive { lambda },
        ]));
    }
    Ok(())
}

impl Feasibility {
    fn ok_or_err(self) -> Result<Feasibility, BoundError> {
        if self.ok {
            Ok(self)
        } else {
            Err(BoundError::Infeasible(self.violations))
        }
    }
}

/// β-integration limits: the prime ranges `[z, D^{8/23})` and
/// `[D^{8/23}, M)` expressed as exponents of `q`.
fn beta_limits(theta: f64) -> (f64, f64, f64) {
    (
        (30.0 * theta - 35.0) / 92.0,
        (12.0 * theta - 14.0) / 23.0,
        theta - 1.0,
    )
}

/// Final-display coefficient in front of both β-integrals.
///
/// The partial-summation form carries `2 (6θ-7)/(4δ)` and the weighted
/// sum divides by `λ`; at ε = 0, `1/λ = δ/(3δ-θ)`, so
/// `2 (6θ-7)/(4δ) · 1/λ = (6θ-7)/(2(3δ-θ))`. For ε > 0 the same product
/// is `(6θ-7)/(2δλ)`.
fn correction_coefficient(p: &BoundParams) -> f64 {
    let lambda = ExponentSystem::new(p).lambda;
    (6.0 * p.theta - 7.0) / (2.0 * p.delta * lambda)
}

fn guard_pole(theta: f64, beta_hi: f64) -> Result<(), BoundError> {
    let c = (6.0 * theta - 7.0) / 4.0;
    let margin = c - beta_hi;
    if margin < POLE_MARGIN {
        return Err(BoundError::IntegrandPole { margin });
    }
    Ok(())
}

/// Main bracket term `2 (log(18/5) + ∫_3^{18/5} dt1/t1 ∫_2^{t1-1}
/// log(t2-1)/t2 dt2)`. θ-independent: `z = D^{5/23}` always puts the
/// sifting parameter at `u = 23/5`.
pub fn main_term(p: &BoundParams, cfg: QuadConfig) -> Result<Estimate, BoundError> {
    feasible(p).ok_or_err()?;
    let dbl = integrate_nested(
        |t1, v| v / t1,
        |t1| Interval {
            lo: 2.0,
            hi: t1 - 1.0,
        },
        |_, t2| (t2 - 1.0).ln() / t2,
        Interval {
            lo: 3.0,
            hi: 18.0 / 5.0,
        },
        cfg,
    )?;
    let value = 2.0 * ((18.0f64 / 5.0).ln() + dbl.value);
    Ok(Estimate {
        value,
        err: 2.0 * dbl.err + 4.0 * f64::EPSILON * value.abs(),
    })
}

/// First correction: the weighted upper-sieve sum over primes in
/// `[z, D^{8/23})`,
/// `coeff · ∫ (δ-β)/(β(c-β)) (1 + ∫_2^{U(β)} log(t-1)/t dt) dβ`
/// with `c = (6θ-7)/4` and `U(β) = (108θ-126-92β)/(30θ-35)`.
pub fn correction1(p: &BoundParams, cfg: QuadConfig) -> Result<Estimate, BoundError> {
    require_feasible(p)?;
    let theta = p.theta;
    let delta = p.delta;
    let (b_lo, b_hi, _) = beta_limits(theta);
    guard_pole(theta, b_hi)?;
    let c = (6.0 * theta - 7.0) / 4.0;
    let base = move |beta: f64| (delta - beta) / (beta * (c - beta));
    let upper = move |beta: f64| (108.0 * theta - 126.0 - 92.0 * beta) / (30.0 * theta - 35.0);

    let plain = integrate(base, Interval { lo: b_lo, hi: b_hi }, cfg)?;
    // the inner factor is folded into the inner integrand so the outer
    // combiner is 1-Lipschitz in the inner value
    let weighted = integrate_nested(
        |_, v| v,
        move |beta| Interval {
            lo: 2.0,
            hi: upper(beta).max(2.0),
        },
        move |beta, t| base(beta) * (t - 1.0).ln() / t,
        Interval { lo: b_lo, hi: b_hi },
        cfg,
    )?;
    let coeff = correction_coefficient(p);
    let value = coeff * (plain.value + weighted.value);
    Ok(Estimate {
        value,
        err: coeff * (plain.err + weighted.err) + 4.0 * f64::EPSILON * value.abs(),
    })
}

/// Second correction: the same β-integrand without the inner integral,
/// over `[D^{8/23}, M)`, i.e. `coeff · ∫ (δ-β)/(β(c-β)) dβ`.
pub fn correction2(p: &BoundParams, cfg: QuadConfig) -> Result<Estimate, BoundError> {
    require_feasible(p)?;
    let theta = p.theta;
    let delta = p.delta;
    let (_, b_lo, b_hi) = beta_limits(theta);
    guard_pole(theta, b_hi)?;
    let c = (6.0 * theta - 7.0) / 4.0;
    let est = integrate(
        move |beta| (delta - beta) / (beta * (c - beta)),
        Interval { lo: b_lo, hi: b_hi },
        cfg,
    )?;
    let coeff = correction_coefficient(p);
    let value = coeff * est.value;
    Ok(Estimate {
        value,
        err: coeff * est.err + 4.0 * f64::EPSILON * value.abs(),
    })
}

/// Closed form of [`correction2`] by partial fractions:
/// `(δ-β)/(β(c-β)) = (δ/c)/β + ((δ-c)/c)/(c-β)`, so the integral is
/// `(δ/c) log(b/a) + ((c-δ)/c) log((c-b)/(c-a))`.
pub fn correction2_closed_form(p: &BoundParams) -> Result<f64, BoundError> {
    require_feasible(p)?;
    let theta = p.theta;
    let delta = p.delta;
    let (_, a, b) = beta_limits(theta);
    guard_pole(theta, b)?;
    let c = (6.0 * theta - 7.0) / 4.0;
    let integral = delta / c * (b / a).ln() + (c - delta) / c * ((c - b) / (c - a)).ln();
    Ok(correction_coefficient(p) * integral)
}

/// Third correction: the two-dimensional upper-sieve block for primes
/// in `[M, y)`, `(6θ-7)/(δλ) (2(δ-θ+1)/(2θ-3))²`. Closed form.
pub fn correction3(p: &BoundParams) -> Result<f64, BoundError> {
    require_feasible(p)?;
    // (6θ-7)/δ from partial summation times 1/λ; at ε = 0 this is
    // (6θ-7)/(3δ-θ), twice the β-integral coefficient
    let coeff = 2.0 * correction_coefficient(p);
    let ratio = 2.0 * (p.delta - p.theta + 1.0) / (2.0 * p.theta - 3.0);
    Ok(coeff * ratio * ratio)
}

/// Full per-term breakdown of the bracket.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BracketBreakdown {
    pub main: f64,
    pub corr1: f64,
    pub corr2: f64,
    pub corr3: f64,
    /// `main - corr1 - corr2 - corr3`, exactly as stored
    pub total: f64,
    /// sum of the component error bounds
    pub err: f64,
}

impl BracketBreakdown {
    /// True when positivity stands clear of the certified error band.
    pub fn certified_positive(&self) -> bool {
        self.total - self.err > 0.0
    }
}

/// Evaluate the bracket `B(θ, δ)` with its per-term breakdown.
/// Positivity of `total` (beyond `err`) certifies the exponent pair.
pub fn bracket(p: &BoundParams, cfg: QuadConfig) -> Result<BracketBreakdown, BoundError> {
    let main = main_term(p, cfg)?;
    let c1 = correction1(p, cfg)?;
    let c2 = correction2(p, cfg)?;
    let c3 = correction3(p)?;
    let c3_err = 4.0 * f64::EPSILON * c3.abs();
    let total = main.value - c1.value - c2.value - c3;
    Ok(BracketBreakdown {
        main: main.value,
        corr1: c1.value,
        corr2: c2.value,
        corr3: c3,
        total,
        err: main.err + c1.err + c2.err + c3_err,
    })
}
