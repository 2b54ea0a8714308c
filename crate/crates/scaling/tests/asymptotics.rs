use aap_exact::float;
use aap_model::ModelParams;
use aap_scaling::*;

const Q: f64 = -0.5;
const RC: f64 = 2.0 / 3.0;

fn exact(n: usize, p: usize, r: f64) -> (f64, f64) {
    let m = ModelParams::new(n, p, Q, r).unwrap();
    let nf = n as f64;
    let j = float::current(&m).unwrap().current / nf;
    let d = float::diffusion(&m, 1e-13).unwrap().delta / (nf * nf);
    (j, d)
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Integer `p` nearest to `ρ_c - β√(ρ_c(1-ρ_c)/N)`, and the model at that `p`.
fn at_beta(n: usize, beta: f64, r: f64) -> ModelParams {
    let rho = RC - beta * (RC * (1.0 - RC) / n as f64).sqrt();
    ModelParams::new(n, (rho * n as f64).round() as usize, Q, r).unwrap()
}

const LADDER: [usize; 3] = [99, 399, 1599];

#[test]
fn crossover_current_residual_is_order_one_over_n() {
    for r in [1.0, 0.3] {
        for beta in [0.0, 1.0] {
            let mut dev = vec![];
            for n in LADDER {
                let m = at_beta(n, beta, r);
                let b = m.beta();
                if beta == 0.0 {
                    assert_eq!(b, 0.0);
                    assert_eq!(crossover_current_correction(n, b, Q).unwrap(), 0.0);
                }
                let j = float::current(&m).unwrap().current / n as f64;
                let scaled = j / (n as f64 * m.k_factor());
                let d = (scaled - f_beta(b).unwrap() - crossover_current_correction(n, b, Q).unwrap()).abs();
                assert!(n as f64 * d < 1.0, "R = {r}, beta = {b}, N = {n}: N·dev = {}", n as f64 * d);
                if beta != 0.0 && n == 1599 {
                    // the correction must remove the O(N^{-1/2}) part
                    assert!(d < 0.2 * (scaled - f_beta(b).unwrap()).abs());
                }
                dev.push(d);
            }
            assert!(decreasing(&dev), "R = {r}, beta = {beta}: {dev:?}");
        }
    }
}

#[test]
fn crossover_diffusion_relative_error_is_order_n_to_minus_half() {
    for beta in [0.0, 1.0, -1.0] {
        let mut dev = vec![];
        for n in LADDER {
            let m = at_beta(n, beta, 1.0);
            let (_, d) = exact(m.n, m.p, 1.0);
            let scaled = d / ((n as f64).powf(1.5) * m.k_factor() * (RC * (1.0 - RC)).sqrt());
            let e = (scaled / g_beta(m.beta()).unwrap() - 1.0).abs();
            assert!((n as f64).sqrt() * e < 2.0, "beta = {beta}, N = {n}: {e}");
            assert!((d / crossover_diffusion(n, m.beta(), Q, 1.0, 0.0).unwrap() - 1.0).abs() - e < 1e-12);
            dev.push(e);
        }
        assert!(decreasing(&dev), "beta = {beta}: {dev:?}");
        // quadrupling N must at least cut the error by √4 up to a margin
        assert!(dev[0] / dev[2] > 3.0, "beta = {beta}: {dev:?}");
    }
}

#[test]
fn subcritical_current_and_diffusion_track_exact() {
    for r in [1.0, 0.3] {
        let j_inf = subcritical_current(0.4, Q, r, 1.0 - r).unwrap();
        let amp = subcritical_diffusion_amplitude(0.4, Q, r, 1.0 - r).unwrap();
        let (mut ej, mut ed) = (vec![], vec![]);
        for n in [200usize, 400, 800] {
            let (j, d) = exact(n, 2 * n / 5, r);
            ej.push((j / j_inf - 1.0).abs());
            ed.push((d * (n as f64).sqrt() / amp - 1.0).abs());
        }
        for w in ej.windows(2) {
            assert!((1.6..2.4).contains(&(w[0] / w[1])), "R = {r}: {ej:?}");
        }
        for w in ed.windows(2) {
            assert!(w[0] / w[1] > 2f64.sqrt() * 0.9, "R = {r}: {ed:?}");
        }
    }
}

#[test]
fn regime_asymptotics_along_ladder() {
    let force = |r| Mode::Force(r);
    let (mut sub_j, mut sub_d, mut sup_j, mut sup_d) = (vec![], vec![], vec![], vec![]);
    let mut logs = vec![];
    for n in [100usize, 200, 400] {
        let m = ModelParams::new(n, 2 * n / 5, Q, 1.0).unwrap();
        let (j, d) = exact(n, m.p, 1.0);
        sub_j.push((j / asymptotic_current_with(&m, force(Regime::Sub)).unwrap().value() - 1.0).abs());
        sub_d.push((d / asymptotic_diffusion_with(&m, force(Regime::Sub)).unwrap().value() - 1.0).abs());
        let m = ModelParams::new(n, 4 * n / 5, Q, 1.0).unwrap();
        let (j, d) = exact(n, m.p, 1.0);
        let (aj, ad) = (asymptotic_current_with(&m, force(Regime::Super)).unwrap(), asymptotic_diffusion_with(&m, force(Regime::Super)).unwrap());
        sup_j.push((j.ln() - aj.log_value).abs());
        sup_d.push((d.ln() - ad.log_value).abs());
        logs.push((j.ln() - 1.5 * (n as f64).ln(), d.ln() - 2.0 * (n as f64).ln()));
    }
    for v in [&sub_j, &sub_d, &sup_j, &sup_d] {
        assert!(decreasing(v), "{v:?}");
    }
    let s = rel_entropy(0.8, RC).unwrap();
    let slope_j = (logs[2].0 - logs[1].0) / 200.0;
    let slope_d = (logs[2].1 - logs[1].1) / 200.0;
    assert!((slope_j / s - 1.0).abs() < 0.01, "{slope_j} vs {s}");
    assert!((slope_d / (2.0 * s) - 1.0).abs() < 0.01, "{slope_d} vs {}", 2.0 * s);
}

#[test]
fn supercritical_prefactors_match_exact_ladder() {
    // both displays carry the right constant: the ratio to exact tends to one like 1/N
    for r in [1.0, 0.3] {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [200usize, 400, 800] {
            let m = ModelParams::new(n, 4 * n / 5, Q, r).unwrap();
            let (j, d) = exact(n, m.p, r);
            let sup = Mode::Force(Regime::Super);
            let ej = (j.ln() - asymptotic_current_with(&m, sup).unwrap().log_value).abs();
            let ed = (d.ln() - asymptotic_diffusion_with(&m, sup).unwrap().log_value).abs();
            assert!(ej * n as f64 <= 1.0 && ed * n as f64 <= 2.0, "N = {n}: {ej} {ed}");
            assert!(ej < prev.0 && ed < prev.1);
            prev = (ej, ed);
        }
    }
}

#[test]
fn supercritical_log_structure() {
    let m = ModelParams::new(5000, 4000, Q, 0.6).unwrap();
    let res = asymptotic_current(&m).unwrap();
    assert_eq!(res.regime, Regime::Super);
    let s = rel_entropy(0.8, RC).unwrap();
    let rest = res.log_value - 5000.0 * s - 1.5 * 5000f64.ln();
    let a = 0.8 * 0.2;
    let pre = (2.0 * std::f64::consts::PI * a).sqrt() / (RC * (1.0 - RC)) * (0.8 - RC) * m.k_factor();
    assert!((rest - pre.ln()).abs() < 1e-9);
    assert_eq!(res.exponential_rate, s);
    assert_eq!(asymptotic_diffusion(&m).unwrap().exponential_rate, 2.0 * s);
}

#[test]
fn critical_point_values() {
    let m = ModelParams::new(1599, 1066, Q, 0.3).unwrap();
    assert_eq!(m.beta(), 0.0);
    let k = 0.3 * RC + 0.7 * (1.0 - RC);
    for mode in [Mode::Force(Regime::Critical), Mode::Force(Regime::Crossover)] {
        let j = asymptotic_current_with(&m, mode).unwrap().value();
        assert!((j / (1599.0 * k) - 1.0).abs() < 1e-12);
        let d = asymptotic_diffusion_with(&m, mode).unwrap().value();
        let expect = 1599f64.powf(1.5) * k * (std::f64::consts::PI * RC * (1.0 - RC)).sqrt();
        assert!((d / expect - 1.0).abs() < 1e-12);
    }
    let (j, d) = exact(1599, 1066, 0.3);
    assert!((j / (1599.0 * k) - 1.0).abs() < 1.0 / 1599.0);
    assert!((d / asymptotic_diffusion(&m).unwrap().value() - 1.0).abs() < 1.0 / 1599f64.sqrt());
}

#[test]
fn kpz_amplitude_matches_closed_form() {
    for (rho, r) in [(0.3, 1.0), (0.4, 1.0), (0.5, 1.0), (0.3, 0.3), (0.5, 0.3), (0.2, 0.0)] {
        let c = kpz_invariant_check(rho, Q, r, 1.0 - r).unwrap();
        assert!(c.residual < 1e-3, "{c:?}");
    }
}

#[test]
fn kpz_finite_size_correction() {
    let c = kpz_finite_size_check(400, 200, Q, 1.0).unwrap();
    assert!(c.residual < 0.01, "{c:?}");
    assert!(c.b_estimate < 0.0);
}
