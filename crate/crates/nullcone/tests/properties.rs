//! Property tests for the algebraic invariants.

use nullcone::asymptotic::{asymptotic_coefficients, QuadraticNonlinearity};
use nullcone::diagnostics::{gronwall_hypothesis_holds, gronwall_oracle, weighted_gm_bound};
use nullcone::frame::{decompose, reconstruct, SymTensor4};
use nullcone::reports::fit_power_law;
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(x, y, z)| (x * x + y * y + z * z).sqrt() > 0.1)
        .prop_map(|(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            [x / n, y / n, z / n]
        })
}

fn sym_tensor() -> impl Strategy<Value = SymTensor4> {
    proptest::array::uniform10(-3.0..3.0f64).prop_map(|e| {
        let mut t = SymTensor4::zero();
        let mut idx = 0;
        for a in 0..4 {
            for b in a..4 {
                t.set(a, b, e[idx]);
                idx += 1;
            }
        }
        t
    })
}

proptest! {
    #[test]
    fn frame_roundtrip_is_identity(g in sym_tensor(), omega in direction()) {
        let back = reconstruct(&decompose(&g, omega).unwrap(), omega).unwrap();
        prop_assert!(back.max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn coefficients_scale_bilinearly(c in -4.0..4.0f64, omega in direction()) {
        // Doubling is exact in floating point.
        let nl = QuadraticNonlinearity::model_linearization(c);
        let a = asymptotic_coefficients(&nl, omega);
        let b = asymptotic_coefficients(&nl.scale(2.0), omega);
        for m in 0..3 {
            for n in 0..3 {
                prop_assert_eq!(b.a[m][n], 2.0 * a.a[m][n]);
            }
        }
    }

    #[test]
    fn convexity_bound(a in 1e-8..1e6f64, b in 1e-8..1e6f64, nu in 0.01..0.99f64) {
        prop_assert!(weighted_gm_bound(a, b, nu) <= a + b);
    }

    #[test]
    fn gronwall_bound_holds_for_power_families(
        e0 in 0.1..10.0f64,
        b in 0.1..4.0f64,
        epsilon in 0.001..0.2f64,
        beta_frac in 0.0..1.0f64,
    ) {
        let beta = beta_frac * b;
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|k| {
                let t = k as f64 * 2.0;
                (t, e0 * (1.0 + t).powf(beta * epsilon))
            })
            .collect();
        if gronwall_hypothesis_holds(&samples, 0.0, b, epsilon) {
            for &(t, e) in &samples {
                prop_assert!(e <= gronwall_oracle(e0, 0.0, b, epsilon, t));
            }
        }
    }

    #[test]
    fn power_law_fit_recovers_exponent(
        c in 0.1..10.0f64,
        p in -3.0..3.0f64,
    ) {
        let samples: Vec<(f64, f64)> = (1..40)
            .map(|k| {
                let t = k as f64;
                (t, c * (1.0 + t).powf(p))
            })
            .collect();
        let fit = fit_power_law("synthetic", &samples);
        prop_assert!((fit.exponent.unwrap() - p).abs() < 1e-6);
    }
}
