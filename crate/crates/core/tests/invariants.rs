use approx::relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use vlc_core::channel::{gain_matrix_at, jacobian_at, GainMatrix};
use vlc_core::estimators::{hybrid_locate, RssParams, StartPolicy};
use vlc_core::frontend::{LedModel, ObservationVector};
use vlc_core::ofdm::{
    build_frame, clipping_noise_variance, demodulate_rss, hard_clip, remove_cyclic_prefix,
    scaling_factor, solve_h, superpose, OfdmConfig,
};
use vlc_core::scene::{build_scenario, Scenario, ScenarioConfig};
use vlc_core::Vec3;

fn scenario() -> Scenario {
    build_scenario(&ScenarioConfig::default()).unwrap()
}

fn interior() -> impl Strategy<Value = Vec3> {
    (0.3..4.7f64, 0.3..3.7f64, 0.1..2.4f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gains_are_finite_and_non_negative(p in interior()) {
        let gm = gain_matrix_at(&scenario(), &p).unwrap();
        prop_assert!(gm.values.iter().all(|g| g.is_finite() && *g >= 0.0 && *g < 1e-3));
    }

    #[test]
    fn jacobian_matches_central_differences(p in interior()) {
        let sc = scenario();
        let j = jacobian_at(&sc, &p, 1.0).unwrap();
        let h = 1e-5;
        for axis in 0..3 {
            let mut d = Vec3::zeros();
            d[axis] = h;
            let a = gain_matrix_at(&sc, &(p + d)).unwrap();
            let b = gain_matrix_at(&sc, &(p - d)).unwrap();
            for i in 0..j.len() {
                if a.values[i] == 0.0 || b.values[i] == 0.0 {
                    continue;
                }
                let fd = (a.values[i] - b.values[i]) / (2.0 * h);
                prop_assert!((j[i][axis] - fd).abs() <= 1e-6 * j[i].norm());
            }
        }
    }

    #[test]
    fn noise_free_hybrid_recovers_position(p in interior()) {
        let sc = scenario();
        let s = ObservationVector::noise_free(&gain_matrix_at(&sc, &p).unwrap());
        let params = RssParams { tolerance: 1e-10, max_iterations: 2000, ..RssParams::default() };
        let rep = hybrid_locate(&sc, &s, StartPolicy::Waoa, &params);
        prop_assert!(!rep.diverged);
        prop_assert!((rep.position - p).norm() < 1e-6);
    }

    #[test]
    fn clipping_stays_in_range_and_is_idempotent(x in prop::collection::vec(-5.0..5.0f64, 1..64)) {
        let once = hard_clip(&x, -1.0, 1.0);
        prop_assert!(once.iter().all(|v| (-1.0..=1.0).contains(v)));
        prop_assert_eq!(hard_clip(&once, -1.0, 1.0), once);
    }

    #[test]
    fn clipping_analytics_are_monotone(g in 0.5..12.0f64) {
        let c = scaling_factor(g);
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert!(scaling_factor(g * 1.1) >= c);
        prop_assert!(clipping_noise_variance(g * 1.1, 1.0, -1.0) <= clipping_noise_variance(g, 1.0, -1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lom_chain_is_transparent(values in prop::collection::vec(1e-7..1e-4f64, 16)) {
        let cfg = OfdmConfig::default();
        let led = LedModel::default();
        let gm = GainMatrix { leds_per_vap: 4, vaps: 4, values };
        let h = solve_h(&cfg).unwrap();
        let pilots = vec![Complex64::new(1.0, 0.0); 4];
        let outputs: Vec<_> = (0..4)
            .map(|k| build_frame(&cfg, k, h, &pilots, &[]).unwrap().optical_output(&led).unwrap())
            .collect();
        let y = remove_cyclic_prefix(&superpose(&outputs, &gm, 0.54).unwrap(), cfg.cp_len);
        let cal = cfg.calibration(0.54, led.conversion_factor().unwrap()).unwrap();
        let s = demodulate_rss(&y, &cfg, &cal).unwrap();
        for (a, b) in s.values.iter().zip(&gm.values) {
            prop_assert!(relative_eq!(*a, *b, max_relative = 1e-9));
        }
    }
}
