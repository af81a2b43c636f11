//! Quadrature engine against brute-force panel oracles, plus the
//! linearity/additivity/refinement properties.

mod common;

use common::midpoint_1d;
use p2ap_core::quadrature::{integrate, integrate_nested, Interval, QuadConfig};
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

#[test]
fn log_kernel_matches_million_panel_oracle() {
    // ∫_2^2.6 log(t-1)/t dt against a 10^6-panel midpoint rule
    let f = |t: f64| (t - 1.0).ln() / t;
    let oracle = midpoint_1d(f, 2.0, 2.6, 1_000_000);
    let est = integrate(f, iv(2.0, 2.6), QuadConfig::with_tol(1e-12)).unwrap();
    assert!(
        (est.value - oracle).abs() <= 1e-9,
        "quadrature {} vs oracle {}",
        est.value,
        oracle
    );
}

#[test]
fn nested_matches_2d_panel_oracle() {
    // ∫_3^3.6 dt1/t1 ∫_2^{t1-1} log(t2-1)/t2 dt2 against a 2000x2000 grid
    let est = integrate_nested(
        |t1, v| v / t1,
        |t1| Interval {
            lo: 2.0,
            hi: t1 - 1.0,
        },
        |_, t2| (t2 - 1.0).ln() / t2,
        iv(3.0, 3.6),
        QuadConfig::with_tol(1e-12),
    )
    .unwrap();
    let oracle = common::midpoint_2d(
        |t1, t2| (t2 - 1.0).ln() / (t1 * t2),
        3.0,
        3.6,
        |_| 2.0,
        |t1| t1 - 1.0,
        2000,
        2000,
    );
    assert!(
        (est.value - oracle).abs() <= 1e-8,
        "nested {} vs oracle {}",
        est.value,
        oracle
    );
}

#[test]
fn monotone_refinement_never_raises_bound() {
    for f in [
        (|t: f64| (t - 1.0).ln() / t) as fn(f64) -> f64,
        (|t: f64| 1.0 / t) as fn(f64) -> f64,
    ] {
        let mut prev = f64::INFINITY;
        let mut tol = 1e-4;
        for _ in 0..20 {
            let est = integrate(f, iv(1.5, 2.9), QuadConfig::with_tol(tol)).unwrap();
            assert!(
                est.err <= prev,
                "err bound rose from {prev} to {} at tol {tol}",
                est.err
            );
            prev = est.err;
            tol *= 0.5;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearity(
        c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
        d0 in -2.0f64..2.0, d1 in -2.0f64..2.0, d2 in -2.0f64..2.0,
        alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
    ) {
        let f = move |t: f64| c0 + c1 * t + c2 * (0.5 * t).sin();
        let g = move |t: f64| d0 + d1 * t * t + d2 * (-t).exp();
        let cfg = QuadConfig::with_tol(1e-10);
        let dom = iv(0.0, 2.0);
        let combined = integrate(|t| alpha * f(t) + beta * g(t), dom, cfg).unwrap();
        let fa = integrate(f, dom, cfg).unwrap();
        let gb = integrate(g, dom, cfg).unwrap();
        let sum = alpha * fa.value + beta * gb.value;
        prop_assert!(
            (combined.value - sum).abs() <= 2.0 * cfg.abs_tol,
            "linearity violated: {} vs {}", combined.value, sum
        );
    }

    #[test]
    fn interval_additivity(
        c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
        split in 0.1f64..0.9,
    ) {
        let f = move |t: f64| c1 * t + c2 * t.cos();
        let cfg = QuadConfig::with_tol(1e-10);
        let (a, c) = (0.0, 3.0);
        let b = a + split * (c - a);
        let whole = integrate(f, iv(a, c), cfg).unwrap();
        let left = integrate(f, iv(a, b), cfg).unwrap();
        let right = integrate(f, iv(b, c), cfg).unwrap();
        prop_assert!(
            (whole.value - left.value - right.value).abs() <= 2.0 * cfg.abs_tol
        );
    }
}
