use std::f64::consts::PI;

use aap_scaling::*;
use statrs::function::erf::erfc;

/// Composite Simpson rule, deliberately independent of the library quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn rel(x: f64, y: f64) -> f64 {
    (x / y - 1.0).abs()
}

#[test]
fn erfcx_against_quadrature_oracle() {
    let tail = simpson(|t| (-t * t).exp(), 1.0, 9.0, 20_000);
    let oracle = 2.0 / PI.sqrt() * 1f64.exp() * tail;
    assert!(rel(erfcx(1.0), oracle) < 1e-12, "{} vs {oracle}", erfcx(1.0));
    for x in [-3.0f64, -0.5, 0.25, 2.0, 7.5, 29.0] {
        let direct = 2.0 / PI.sqrt() * simpson(|t| (x * x - t * t).exp(), x, x.max(0.0) + 9.0, 200_000);
        assert!(rel(erfcx(x), direct) < 1e-12, "x = {x}: {} vs {direct}", erfcx(x));
    }
}

#[test]
fn anchors_at_zero() {
    assert!((f_beta(0.0).unwrap() - 1.0).abs() < 1e-10);
    assert!((g_beta(0.0).unwrap() - PI.sqrt()).abs() < 1e-10);
    assert!((j_beta(0.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-10);
    // just outside the series branch the full formula must agree as well
    assert!((j_beta(2e-6).unwrap() - ((2.0 * PI).sqrt() - 12e-6)).abs() < 1e-10);
}

#[test]
fn f_at_one_matches_high_precision_value() {
    // 40-digit evaluation of 1 - √(π/2) e^{1/2} erfc(1/√2)
    assert!((f_beta(1.0).unwrap() - 0.344_320_457_581_201_5).abs() < 1e-14);
    assert!((f_beta(1.0).unwrap() - 0.3443).abs() < 1e-4);
}

#[test]
fn f_large_beta_expansion() {
    let b: f64 = 10.0;
    let two_term = 1.0 / (b * b) - 3.0 / b.powi(4);
    let f = f_beta(b).unwrap();
    assert!((two_term - 0.0097).abs() < 1e-15);
    // the first omitted term is 15/β⁶
    assert!((f - two_term).abs() < 15.0 / b.powi(6), "{f}");
    assert!((f - two_term - 15.0 / b.powi(6)).abs() < 105.0 / b.powi(8));
}

#[test]
fn f_strictly_decreasing_and_positive() {
    let n = 10_000;
    let mut prev = f64::INFINITY;
    for i in 0..n {
        let b = -30.0 + 60.0 * i as f64 / (n - 1) as f64;
        let f = f_beta(b).unwrap();
        assert!(f > 0.0 && f < prev, "beta = {b}");
        prev = f;
    }
}

#[test]
fn g_large_beta_bound() {
    for b in [8.0f64, 10.0, 20.0, 100.0] {
        let g = g_beta(b).unwrap();
        assert!((g - 1.5 * PI.sqrt() / b.powi(4)).abs() < 50.0 * PI.sqrt() / b.powi(6), "beta = {b}: {g}");
    }
}

#[test]
fn g_negative_beta_two_terms() {
    let b: f64 = -3.0;
    let g = g_beta(b).unwrap();
    let lead = -4.0 * PI * b * (b * b).exp();
    let sub = 2f64.sqrt() * PI * b * (b * b / 2.0).exp();
    // the subleading term enters with a plus sign; the next one is O(1)
    assert!((g - (lead + sub)).abs() < 2.0 * PI.sqrt(), "{g} vs {}", lead + sub);
    assert!(rel(g, lead) < 0.01);
}

#[test]
fn j_large_beta_bound() {
    for b in [8.0f64, 10.0, 15.0] {
        let j = j_beta(b).unwrap();
        assert!((j - 10.0 / b.powi(5)).abs() < 130.0 / b.powi(7), "beta = {b}: {j}");
    }
}

#[test]
fn j_tracks_g_for_negative_beta() {
    for b in [-3.0f64, -4.0, -8.0, -12.0, -20.0, -26.0] {
        let (j, g) = (j_beta(b).unwrap(), g_beta(b).unwrap());
        assert!((j / g - 1.0).abs() < 3.0 / b.abs(), "beta = {b}: {j} vs {g}");
    }
}

#[test]
fn j_against_direct_quadrature() {
    // untransformed integrand, fine where e^{x²/2} erfc² is still representable
    for b in [-2.0f64, -0.5, 0.5, 2.0, 4.0] {
        let f = f_beta(b).unwrap();
        let tail = simpson(|x| (x * x / 2.0).exp() * erfc(x / 2f64.sqrt()).powi(2), b, b + 14.0, 40_000);
        let oracle = 2.0 * (1.0 - f) / b - 4.0 * b * f + (b * b / 2.0).exp() * PI * b * b * tail;
        assert!((j_beta(b).unwrap() - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "beta = {b}: {} vs {oracle}", j_beta(b).unwrap());
    }
}

#[test]
fn overflow_is_reported() {
    assert!(matches!(f_beta(-40.0), Err(ScalingError::Overflow(_))));
    assert!(g_beta(-30.0).is_err());
    assert!(f_beta(f64::NAN).is_err());
}

#[test]
fn relative_entropy_examples() {
    let rc = 2.0 / 3.0;
    assert_eq!(rel_entropy(rc, rc).unwrap(), 0.0);
    assert!((rel_entropy(1.0, rc).unwrap() - 1.5f64.ln()).abs() < 1e-12);
    let (a, b, c) = (rel_entropy(0.75, rc).unwrap(), rel_entropy(0.8, rc).unwrap(), rel_entropy(0.85, rc).unwrap());
    assert!(b > 0.0 && a + c - 2.0 * b > 0.0);
}

#[test]
fn curve_rows_follow_functions() {
    let rows = scaling_curve(-2.0, 3.0, 11).unwrap();
    assert_eq!(rows.len(), 11);
    for r in rows {
        assert_eq!(r.f, f_beta(r.beta).unwrap());
        assert_eq!(r.j, j_beta(r.beta).unwrap());
    }
}
