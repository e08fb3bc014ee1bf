use catsurf_core::smoothing::{
    admissible_delta, cap_geometry, certify, gaussian_curvature, log_deriv, smoothed_factor, ConeMetric, Mode, SmoothingParams,
};
use proptest::prelude::*;

fn params(c: &ConeMetric, mode: Mode) -> SmoothingParams {
    SmoothingParams::new(admissible_delta(c, mode).unwrap().delta, mode)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flat_mode_certifies(alpha in 1.05f64..4.0, kappa in 0.0f64..1.0) {
        let c = ConeMetric::new(alpha, kappa, 0.8).unwrap();
        let cert = certify(&c, &params(&c, Mode::Flat), 600).unwrap();
        prop_assert!(cert.passed(), "{:?}", cert);
    }

    #[test]
    fn hyperbolic_mode_certifies(alpha in 1.05f64..4.0, kappa in -3.0f64..1.0) {
        let c = ConeMetric::new(alpha, kappa, 0.5).unwrap();
        let cert = certify(&c, &params(&c, Mode::Hyperbolic), 600).unwrap();
        prop_assert!(cert.passed(), "{:?}", cert);
    }

    #[test]
    fn cbb_mode_certifies(alpha in 0.2f64..0.95, kappa in -1.0f64..0.0) {
        let c = ConeMetric::new(alpha, kappa, 0.8).unwrap();
        let p = params(&c, Mode::Cbb);
        let cert = certify(&c, &p, 600).unwrap();
        prop_assert!(cert.passed(), "{:?}", cert);
        prop_assert!(cert.min_curvature >= kappa - 1e-6);
    }

    /// Outside the cap the metric is untouched.
    #[test]
    fn tail_is_the_cone(alpha in 1.05f64..3.0, kappa in 0.0f64..1.0, t in 1.0f64..1.5) {
        let c = ConeMetric::new(alpha, kappa, 0.8).unwrap();
        let p = params(&c, Mode::Flat);
        let r = (p.delta * t).min(0.8);
        let cone = catsurf_core::smoothing::cone_factor(&c, r).unwrap();
        prop_assert!((smoothed_factor(&c, &p, r).unwrap() - cone).abs() <= 1e-12 * cone);
        prop_assert_eq!(gaussian_curvature(&c, Some(&p), r).unwrap(), kappa);
        // The raw formula cancels terms of size |L/r|/λ.
        let scale = 1.0 + (log_deriv(&c, r).unwrap().first / r).abs() / cone;
        prop_assert!((gaussian_curvature(&c, None, r).unwrap() - kappa).abs() <= 1e-9 * scale);
    }

    /// Shrinking the cap shrinks its area and diameter.
    #[test]
    fn caps_are_monotone_in_delta(alpha in 1.05f64..3.0, kappa in 0.0f64..1.0, f in 0.1f64..0.9) {
        let c = ConeMetric::new(alpha, kappa, 0.8).unwrap();
        let p = params(&c, Mode::Flat);
        let small = SmoothingParams::new(p.delta * f, Mode::Flat);
        let (a, b) = (cap_geometry(&c, &p).unwrap(), cap_geometry(&c, &small).unwrap());
        prop_assert!(b.area < a.area && b.diameter < a.diameter);
    }
}
