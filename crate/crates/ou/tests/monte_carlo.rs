use aap_ou::{area_mc, area_moments};
use aap_scaling::f_beta;

fn within(mc: f64, se: f64, exact: f64, k: f64) -> bool {
    (mc - exact).abs() <= k * se
}

#[test]
fn grid_agrees_with_quadrature() {
    for alpha in [0.1, 1.0] {
        for (i, beta) in [-1.0, 0.0, 1.0, 3.0].into_iter().enumerate() {
            let q = area_moments(alpha, beta, 1e-8).unwrap();
            let dt = 1e-3 / (beta + alpha).abs().max(1.0);
            let r = area_mc(alpha, beta, dt, 20_000, 100 + i as u64).unwrap();
            assert_eq!(r.excluded, 0);
            assert!(within(r.a1, r.a1_se, q.a1, 3.0), "A1 at ({alpha}, {beta}): {} ± {} vs {}", r.a1, r.a1_se, q.a1);
            assert!(within(r.a2, r.a2_se, q.a2, 3.0), "A2 at ({alpha}, {beta}): {} ± {} vs {}", r.a2, r.a2_se, q.a2);
        }
    }
}

#[test]
fn small_alpha_strong_drift_tracks_f() {
    let alpha = 0.01;
    let r = area_mc(alpha, 3.0, 1e-3 / 3.01, 50_000, 5).unwrap();
    let f = f_beta(3.0).unwrap();
    assert!(within(r.a1 / alpha, r.a1_se / alpha, f, 3.0), "{} ± {} vs {f}", r.a1 / alpha, r.a1_se / alpha);
}

#[test]
fn stronger_drift_means_smaller_area() {
    let alpha = 0.5;
    let a: Vec<f64> = [0.0, 1.0, 2.0].iter().map(|&b| area_mc(alpha, b, 2e-4, 10_000, 77).unwrap().coarse[0]).collect();
    assert!(a[0] > a[1] && a[1] > a[2], "{a:?}");
}
