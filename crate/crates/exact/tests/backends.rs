use aap_exact::formulas::{self, rat, rational_to_f64};
use aap_exact::{float, RationalInput, Side};
use aap_model::ModelParams;
use num_traits::Zero;
use proptest::prelude::*;

const QS: [i64; 3] = [-1, -5, -9];

/// Float parameters together with their exact counterparts (`q` in tenths, `R` in twentieths).
fn params() -> impl Strategy<Value = (ModelParams, RationalInput)> {
    (2usize..=64, 0.0f64..1.0, 0usize..3, 0i64..=20).prop_map(|(n, frac, qi, r)| {
        let p = 1 + ((n - 1) as f64 * frac).round() as usize;
        let m = ModelParams::new(n, p, QS[qi] as f64 / 10.0, r as f64 / 20.0).unwrap();
        (m, RationalInput::new(n, p, rat(QS[qi], 10), rat(r, 20)))
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sum_and_integral_forms_agree((_m, inp) in params()) {
        prop_assert_eq!(formulas::current_sum(&inp), formulas::current_integral(&inp));
    }

    #[test]
    fn vanishing_and_doubling_identities((_m, inp) in params()) {
        for side in [Side::Right, Side::Left] {
            prop_assert!(formulas::a_moment(&inp, side).is_zero());
            prop_assert!(formulas::doubling_residual(&inp, side).is_zero());
        }
    }

    #[test]
    fn mirror_identity((m, inp) in params()) {
        let swapped = RationalInput::new(m.n, m.p, inp.q.clone(), inp.l.clone());
        prop_assert_eq!(formulas::current_sum(&inp), -formulas::current_mirror(&swapped));
    }

    #[test]
    fn float_matches_rational((m, inp) in params()) {
        let j = rational_to_f64(&formulas::current_sum(&inp));
        let d = rational_to_f64(&formulas::diffusion(&inp));
        let f = float::diffusion(&m, 1e-15).unwrap();
        // J can vanish at small R; compare on the scale of its two halves
        let scale = m.n as f64 * (m.r * f.current.j_r.abs() + m.l * f.current.j_l.abs());
        prop_assert!((f.current.current - j).abs() <= 1e-12 * scale.max(1e-300), "J {} vs {}", f.current.current, j);
        prop_assert!(close(f.delta, d, 1e-9), "Δ {} vs {}", f.delta, d);
        prop_assert!(f.vanishing_residual < 1e-10);
    }

    #[test]
    fn diffusion_positive((_m, inp) in params()) {
        let d = rational_to_f64(&formulas::diffusion(&inp));
        prop_assert!(d > 0.0);
    }
}

#[test]
fn float_reaches_large_rings() {
    for (n, p, q) in [(2000usize, 1000usize, -0.5), (1599, 1066, -0.5), (1500, 1000, -0.9), (4000, 2666, -0.5), (400, 320, -0.5)] {
        let m = ModelParams::new(n, p, q, 1.0).unwrap();
        let d = float::diffusion(&m, 1e-13).unwrap();
        assert!(d.delta.is_finite() && d.delta > 0.0, "N={n} p={p}: {d:?}");
        assert!(d.current.current > 0.0);
    }
}

#[test]
fn overflow_is_reported() {
    // ρ = 0.9 at N = 3000: the moments exceed the double range
    let m = ModelParams::new(3000, 2700, -0.5, 1.0).unwrap();
    assert!(matches!(float::diffusion(&m, 1e-13), Err(aap_exact::ExactError::Overflow(_))));
}
