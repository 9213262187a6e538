use genfpp::dist::{arrival_time_cdf, genml_cdf, genml_pdf, ssml_cdf, ssml_pdf, GenIIParams, GenIParams};
use genfpp::estimate::{estimate_gen1, estimate_gen2, gen1_log_moments, population_summary};
use genfpp::process::{mean_count, state_pmf, Model};
use genfpp::specfun::{gamma, mittag_leffler, PrabhakarArgs};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn gamma_exponent() -> impl Strategy<Value = f64> {
    (0.2f64..5.0, any::<bool>()).prop_map(|(g, neg)| if neg { -g } else { g })
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn value_at_zero(beta in 0.1f64..3.0, g in 0.1f64..8.0, xi in 0.0f64..5.0) {
        let v = mittag_leffler(PrabhakarArgs::new(beta, g, xi, 0.0)).unwrap();
        prop_assert!((v * gamma(g) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_xi_is_reciprocal_gamma(beta in 0.1f64..1.0, g in 0.1f64..8.0, z in -40.0f64..0.0) {
        let v = mittag_leffler(PrabhakarArgs::new(beta, g, 0.0, z)).unwrap();
        prop_assert_eq!(v, 1.0 / gamma(g));
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn gen1_cdf_derivative_is_pdf(nu in 0.2f64..1.0, d in 0.3f64..3.0, l in 0.3f64..3.0, u in 0.1f64..0.9) {
        let p = GenIParams::new(nu, d, l).unwrap();
        // interior point between the 10% and 90% quantile scale
        let t = p.scale() * (u / (1.0 - u));
        let h = 1e-4 * t;
        let num = (genml_cdf(&p, t + h).unwrap() - genml_cdf(&p, t - h).unwrap()) / (2.0 * h);
        let f = genml_pdf(&p, t).unwrap();
        prop_assert!((num - f).abs() <= 1e-5 * f.max(1.0 / p.scale()), "{num} vs {f}");
    }

    #[test]
    fn gen2_cdf_derivative_is_pdf(nu in 0.2f64..1.0, g in gamma_exponent(), l in 0.3f64..3.0, u in 0.1f64..0.9) {
        let p = GenIIParams::new(nu, g, l).unwrap();
        let x = p.scale() * (u / (1.0 - u));
        let h = 1e-4 * x;
        let num = (ssml_cdf(&p, x + h).unwrap() - ssml_cdf(&p, x - h).unwrap()) / (2.0 * h);
        let f = ssml_pdf(&p, x).unwrap();
        prop_assert!((num - f).abs() <= 1e-5 * f.max(1.0 / p.scale()), "{num} vs {f}");
    }

    #[test]
    fn negative_nu_stretch_is_inverse_ml(nu in 0.2f64..1.0, l in 0.3f64..3.0, x in 0.05f64..20.0) {
        // Xi = 1/X: f(x) = f_X(1/x) / x^2
        let p = GenIIParams::new(nu, -nu, l).unwrap();
        let ml = GenIParams::new(nu, 1.0, l).unwrap();
        let want = genml_pdf(&ml, 1.0 / x).unwrap() / (x * x);
        prop_assert!((ssml_pdf(&p, x).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn state_pmf_is_arrival_cdf_difference(nu in 0.2f64..1.0, d in 0.3f64..3.0, l in 0.3f64..3.0, t in 0.05f64..5.0) {
        let p = GenIParams::new(nu, d, l).unwrap();
        let pmf = state_pmf(&p, t, Some(6)).unwrap();
        for k in 0..=6u32 {
            let hi = if k == 0 { 1.0 } else { arrival_time_cdf(&p, k, t).unwrap() };
            let lo = arrival_time_cdf(&p, k + 1, t).unwrap();
            prop_assert!((pmf.probs[k as usize] - (hi - lo)).abs() <= 1e-8);
        }
    }

    // large lambda t^nu needs hundreds of high-order CDF terms; keep the sampled region cheap
    #[test]
    fn mean_count_is_monotone(nu in 0.3f64..1.0, d in 0.5f64..3.0, l in 0.3f64..1.5, t in 0.05f64..3.0, dt in 0.01f64..1.0) {
        let p = GenIParams::new(nu, d, l).unwrap();
        prop_assert_eq!(mean_count(&p, 0.0).unwrap(), 0.0);
        let (a, b) = (mean_count(&p, t).unwrap(), mean_count(&p, t + dt).unwrap());
        prop_assert!(b >= a - 1e-12, "{a} {b}");
    }

    #[test]
    fn classical_collapse(l in 0.2f64..5.0, t in 0.01f64..4.0) {
        let p = GenIParams::new(1.0, 1.0, l).unwrap();
        prop_assert!((genml_pdf(&p, t).unwrap() - l * (-l * t).exp()).abs() <= 1e-10);
        prop_assert!((genml_cdf(&p, t).unwrap() + (-l * t).exp_m1()).abs() <= 1e-10);
        prop_assert!((mean_count(&p, t).unwrap() - l * t).abs() <= 1e-10 * (1.0 + l * t));
        let pmf = state_pmf(&p, t, Some(12)).unwrap();
        let mut poisson = (-l * t).exp();
        for (k, pk) in pmf.probs.iter().enumerate() {
            if k > 0 {
                poisson *= l * t / k as f64;
            }
            prop_assert!((pk - poisson).abs() <= 1e-10);
        }
    }

    #[test]
    fn gen1_round_trip(nu in 0.2f64..1.0, d in 0.3f64..3.0, l in 0.3f64..3.0) {
        let m = Model::Gen1(GenIParams::new(nu, d, l).unwrap());
        let r = estimate_gen1(&population_summary(&m).unwrap()).unwrap();
        let [a, b, c] = r.triple();
        prop_assert!((a - nu).abs() < 1e-8 && (b - d).abs() < 1e-8 && (c - l).abs() < 1e-8, "{a} {b} {c}");
        prop_assert!(!r.diagnostics.nu_clamped);
        prop_assert!(r.residual_norm < 1e-10);
    }

    #[test]
    fn gen1_residuals_small_without_clamp(mean in -2.0f64..2.0, nu in 0.3f64..1.0, d in 0.3f64..3.0, noise in -0.05f64..0.05) {
        // perturbed attainable moments
        let (_, v, m3) = gen1_log_moments(nu, d, 1.0).unwrap();
        let s = genfpp::estimate::LogMomentSummary { n: 1000, mean_log: mean, var_log: v * (1.0 + noise), mu3_log: m3 };
        if let Ok(r) = estimate_gen1(&s) {
            if !r.diagnostics.nu_clamped {
                prop_assert!(r.residual_norm < 1e-10, "{:?}", r);
            }
        }
    }

    #[test]
    fn gen2_round_trip(nu in 0.1f64..1.0, g in gamma_exponent(), l in 0.3f64..3.0) {
        let m = Model::Gen2(GenIIParams::new(nu, g, l).unwrap());
        let [a, b, c] = estimate_gen2(&population_summary(&m).unwrap()).unwrap().triple();
        prop_assert!((a - nu).abs() < 1e-8 && (b - g).abs() < 1e-8 && (c - l).abs() < 1e-8 * l.max(1.0), "{a} {b} {c}");
    }
}
