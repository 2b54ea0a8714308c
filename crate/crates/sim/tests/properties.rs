use aap_model::ModelParams;
use aap_sim::{SimConfig, Simulator};
use proptest::prelude::*;

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (3usize..24, 0.0f64..1.0, -0.95f64..-0.05, 0.0f64..=1.0).prop_map(|(n, f, q, r)| {
        let p = 1 + ((n - 1) as f64 * f) as usize;
        ModelParams::new(n, p, q, r).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conservation_and_current_bookkeeping(m in arb_params(), seed in any::<u64>()) {
        let mut s = Simulator::new(&m, seed, 0, &SimConfig::default()).unwrap();
        let mut y = 0;
        for _ in 0..3000 {
            let r = s.step();
            y += r.s;
            prop_assert_eq!(s.state.ring.particles(), m.p);
            prop_assert_eq!(r.chi_max == 1, r.steps == 0);
        }
        prop_assert!(s.state.ring.check());
        prop_assert_eq!(y, s.state.y);
    }

    #[test]
    fn reproducible(m in arb_params(), seed in any::<u64>(), replica in 0u64..8) {
        let mut a = Simulator::new(&m, seed, replica, &SimConfig::default()).unwrap();
        let mut b = Simulator::new(&m, seed, replica, &SimConfig::default()).unwrap();
        for _ in 0..500 {
            prop_assert_eq!(a.step(), b.step());
        }
        prop_assert_eq!(a.state.t.to_bits(), b.state.t.to_bits());
    }

    #[test]
    fn mirror_antisymmetry(m in arb_params(), seed in any::<u64>()) {
        let sw = ModelParams::new(m.n, m.p, m.q, m.l).unwrap();
        let mut a = Simulator::new(&m, seed, 0, &SimConfig::default()).unwrap();
        let mut b = Simulator::new(&sw, seed, 0, &SimConfig { mirrored: true, ..Default::default() }).unwrap();
        for _ in 0..500 {
            prop_assert_eq!(a.step().s, -b.step().s);
        }
    }

    #[test]
    fn right_only_sizes_are_positive(n in 3usize..24, f in 0.0f64..1.0, seed in any::<u64>()) {
        let p = 1 + ((n - 1) as f64 * f) as usize;
        let m = ModelParams::new(n, p, -0.5, 1.0).unwrap();
        let mut s = Simulator::new(&m, seed, 0, &SimConfig::default()).unwrap();
        for _ in 0..500 {
            prop_assert!(s.step().s >= 1);
        }
    }
}
