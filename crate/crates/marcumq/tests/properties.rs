//! Property-based checks of the library's structural invariants: bounds,
//! monotonicity, saturation, additivity, and least-squares consistency on
//! randomized inputs.

use proptest::prelude::*;

use marcumq::{
    analytic_params_small_a, connection_mass_closed_form, discrete_error, fit_single,
    lower_incomplete_gamma, marcum_q1, q_tilde, regress_poly, rician_power_ccdf, ApproxParams,
    FitConfig, InitStrategy, Scenario,
};

fn lgamma_positive(s: f64) -> f64 {
    // Γ(s) for the saturation bound, via the library's own γ(s, huge):
    // γ saturates at Γ(s) and 1e6 is far past the knee for s ≤ 5.
    lower_incomplete_gamma(s, 1e6).unwrap()
}

proptest! {
    #[test]
    fn marcum_bounded_and_monotone_in_b(
        a in 0.0..6.0f64,
        b1 in 0.0..12.0f64,
        gap in 1e-6..6.0f64,
    ) {
        let b2 = (b1 + gap).min(12.0);
        let q1 = marcum_q1(a, b1).unwrap();
        let q2 = marcum_q1(a, b2).unwrap();
        prop_assert!((0.0..=1.0).contains(&q1), "Q({a},{b1}) = {q1}");
        prop_assert!((0.0..=1.0).contains(&q2), "Q({a},{b2}) = {q2}");
        // Nonincreasing in b, up to compensated-summation noise.
        prop_assert!(
            q2 <= q1 + 1e-14,
            "Q({a},·) grew: {q1:e} -> {q2:e}"
        );
    }

    #[test]
    fn marcum_monotone_in_a(
        a1 in 0.0..5.0f64,
        gap in 1e-6..2.0f64,
        b in 0.0..10.0f64,
    ) {
        let a2 = a1 + gap;
        let q1 = marcum_q1(a1, b).unwrap();
        let q2 = marcum_q1(a2, b).unwrap();
        // A stronger signal shifts mass upward: Q nondecreasing in a.
        prop_assert!(
            q2 >= q1 - 1e-14,
            "Q(·,{b}) fell: Q({a1})={q1:e} -> Q({a2})={q2:e}"
        );
    }

    #[test]
    fn gamma_monotone_and_saturating(
        x1 in 0.0..60.0f64,
        gap in 1e-9..30.0f64,
    ) {
        for s in [0.5f64, 1.0, 2.0, 5.0] {
            let g1 = lower_incomplete_gamma(s, x1).unwrap();
            let g2 = lower_incomplete_gamma(s, x1 + gap).unwrap();
            let gamma_s = lgamma_positive(s);
            prop_assert!(g1 >= 0.0 && g2 >= 0.0);
            prop_assert!(g2 + 1e-15 * gamma_s >= g1, "γ({s},·) not monotone");
            prop_assert!(g1 <= gamma_s * (1.0 + 1e-14), "γ({s},{x1}) above Γ(s)");
        }
    }

    #[test]
    fn q_tilde_monotone_for_analytic_params(
        a in 0.0..1.5f64,
        b1 in 0.1..5.0f64,
        gap in 1e-3..3.0f64,
    ) {
        let params = analytic_params_small_a(a).unwrap();
        let q1 = q_tilde(params, b1).unwrap();
        let q2 = q_tilde(params, b1 + gap).unwrap();
        prop_assert!(q1 > 0.0 && q1 <= 1.0);
        prop_assert!(q2 < q1, "q_tilde not strictly decreasing at a={a}, b={b1}+{gap}");
    }

    #[test]
    fn rician_ccdf_bounded_and_monotone(
        k in 0.1..10.0f64,
        omega in 0.2..4.0f64,
        x1 in 0.0..6.0f64,
        gap in 1e-6..3.0f64,
    ) {
        let c1 = rician_power_ccdf(k, omega, x1).unwrap();
        let c2 = rician_power_ccdf(k, omega, x1 + gap).unwrap();
        prop_assert!((0.0..=1.0).contains(&c1));
        prop_assert!(c2 <= c1 + 1e-14, "CCDF grew in x");
    }

    #[test]
    fn connection_mass_additive_and_monotone(
        k in 0.5..8.0f64,
        alpha in 0.5..2.0f64,
        r1 in 0.0..2.0f64,
        len in 0.5..3.0f64,
        split in 0.1..0.9f64,
    ) {
        let r2 = r1 + len;
        let r_mid = r1 + split * len;
        let a = (2.0 * k).sqrt();
        let params = analytic_params_small_a(a.min(1.0)).unwrap();
        let sc = |lo: f64, hi: f64| Scenario { k, alpha, r1: lo, r2: hi, omega: 1.0 };
        let whole = connection_mass_closed_form(&sc(r1, r2), params).unwrap();
        let left = connection_mass_closed_form(&sc(r1, r_mid), params).unwrap();
        let right = connection_mass_closed_form(&sc(r_mid, r2), params).unwrap();
        prop_assert!(whole >= 0.0 && left >= 0.0 && right >= 0.0);
        prop_assert!(
            (whole - (left + right)).abs() <= 1e-10 * whole.max(1.0),
            "not additive: {whole:e} vs {left:e}+{right:e}"
        );
        prop_assert!(whole + 1e-12 >= left, "mass not monotone in r2");
    }

    #[test]
    fn regression_reconstructs_polynomial_data(
        c0 in -2.0..2.0f64,
        c1 in -2.0..2.0f64,
        c2 in -2.0..2.0f64,
        c3 in -2.0..2.0f64,
    ) {
        // Fixed well-separated abscissae isolate the solver from Vandermonde
        // conditioning pathologies; coefficients vary freely.
        let truth = |a: f64| ((c3 * a + c2) * a + c1) * a + c0;
        let samples: Vec<(f64, f64)> =
            (0..8).map(|i| (0.7 * i as f64, truth(0.7 * i as f64))).collect();
        let out = regress_poly(&samples, 3).unwrap();
        let scale = 1.0 + c0.abs() + c1.abs() + c2.abs() + c3.abs();
        prop_assert!(out.rss <= 1e-18 * scale * scale, "rss = {:e}", out.rss);
        for (got, want) in out.coeffs.coeffs().iter().zip([c0, c1, c2, c3]) {
            prop_assert!(
                (got - want).abs() <= 1e-9 * scale,
                "coefficient drift: {got} vs {want}"
            );
        }
        // Degree elevation on the same data can only help.
        let higher = regress_poly(&samples, 4).unwrap();
        prop_assert!(higher.rss <= out.rss + 1e-12);
    }

    #[test]
    fn fitted_params_beat_nearby_perturbations(
        dn in -0.01..0.01f64,
        dm in -0.01..0.01f64,
    ) {
        // At a converged fit the gradient norm is certified ≤ 1e-5, so a
        // perturbation d can lower Ê by at most ~1e-5·|d|₁ (curvature only
        // helps); anything beyond that slack would expose a false minimum.
        let (params, e_base) = *fitted_at_one();
        let perturbed = ApproxParams::new(params.nu + dn, params.mu + dm).unwrap();
        let e_pert = discrete_error(1.0, perturbed, 1e-2, 12.0).unwrap();
        prop_assert!(
            e_pert >= e_base - 2e-5 * (dn.abs() + dm.abs()),
            "perturbation ({dn}, {dm}) improved Ê: {e_pert:e} < {e_base:e}"
        );
    }
}

/// One shared δ=1e-2 fit at a = 1 (warm-started from the bundled reference
/// row, so it converges in a handful of sweeps).
fn fitted_at_one() -> &'static (ApproxParams, f64) {
    use std::sync::OnceLock;
    static FIT: OnceLock<(ApproxParams, f64)> = OnceLock::new();
    FIT.get_or_init(|| {
        let config = FitConfig {
            delta: 1e-2,
            init: InitStrategy::Explicit(ApproxParams::new(-1.1739, 2.0921).unwrap()),
            ..FitConfig::default()
        };
        let fit = fit_single(1.0, config).unwrap();
        assert!(fit.converged, "ungated property baseline: {fit:?}");
        (fit.params, fit.achieved_error)
    })
}
