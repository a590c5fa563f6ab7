mod common;

use common::*;
use num_complex::Complex64;
use opuc_zeros::szego::{
    blaschke, blaschke_with_derivative, evaluate, kappa_log, monic_coefficients,
    orthonormal_coefficients,
};
use proptest::prelude::*;

/// First-order change of `|b_n|` when a point on the circle is rounded to
/// the nearest representable complex number.
fn rounding_allowance(db: Complex64) -> f64 {
    4.0 * f64::EPSILON * db.norm()
}

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn phi_and_reversed_have_equal_modulus_on_circle(
        alpha in alphas(0..=64, 0.95),
        theta in -3.2f64..3.2,
    ) {
        let n = alpha.len();
        let e = evaluate(&sequence(alpha), n, Complex64::from_polar(1.0, theta)).unwrap();
        let [phi, phi_star, _, _] = e.unscaled();
        let tol = 1e-12 + rounding_allowance(e.blaschke_derivative());
        prop_assert!((phi.norm() - phi_star.norm()).abs() <= tol * phi_star.norm());
    }

    #[test]
    fn blaschke_maps_disk_into_disk(alpha in alphas(1..=64, 0.95), z in polar(0.0, 0.999)) {
        let n = alpha.len();
        let s = sequence(alpha);
        prop_assert!(blaschke(&s, n, z).unwrap().norm() < 1.0);
        if z.norm() > 0.0 {
            let u = z / z.norm();
            let (b, db) = blaschke_with_derivative(&s, n, u).unwrap();
            prop_assert!((b.norm() - 1.0).abs() <= 1e-12 + rounding_allowance(db));
        }
    }

    #[test]
    fn derivatives_match_central_differences(alpha in alphas(0..=32, 0.9), z in polar(0.2, 2.0)) {
        let n = alpha.len();
        let s = sequence(alpha);
        let h = 1e-6;
        let [_, _, dphi, dphi_star] = evaluate(&s, n, z).unwrap().unscaled();
        let [p1, s1, _, _] = evaluate(&s, n, z + h).unwrap().unscaled();
        let [p0, s0, _, _] = evaluate(&s, n, z - h).unwrap().unscaled();
        prop_assert!(crel_err((p1 - p0) / (2.0 * h), dphi) <= 1e-6);
        if n > 0 {
            prop_assert!(crel_err((s1 - s0) / (2.0 * h), dphi_star) <= 1e-6);
        }
    }

    #[test]
    fn monic_values_satisfy_recurrence(alpha in alphas(1..=32, 0.95), z in polar(0.2, 2.0)) {
        let s = sequence(alpha.clone());
        for (k, &a) in alpha.iter().enumerate() {
            let (phi, phi_star) = evaluate(&s, k, z).unwrap().monic();
            let (next, next_star) = evaluate(&s, k + 1, z).unwrap().monic();
            let expect = z * phi - a * phi_star;
            let expect_star = phi_star - a * z * phi;
            let size = (z * phi).norm() + phi_star.norm();
            prop_assert!((next - expect).norm() <= 1e-12 * size);
            prop_assert!((next_star - expect_star).norm() <= 1e-12 * size);
        }
    }

    #[test]
    fn kappa_log_matches_product(alpha in alphas(0..=64, 0.99)) {
        let n = alpha.len();
        let product: f64 = alpha.iter().map(|a| 1.0 / (1.0 - a * a).sqrt()).product();
        let k = kappa_log(&sequence(alpha), n).unwrap();
        prop_assert!((k - product.ln()).abs() <= 1e-13 * product.ln().abs().max(1.0));
    }

    #[test]
    fn leading_coefficient_is_kappa(alpha in alphas(1..=40, 0.9)) {
        let n = alpha.len();
        let s = sequence(alpha);
        let rows = orthonormal_coefficients(&s, n + 1).unwrap();
        let lead = rows[n][n];
        prop_assert!(rel_err(lead, kappa_log(&s, n).unwrap().exp()) <= 1e-13);
        let (phi, phi_star) = monic_coefficients(&s, n).unwrap();
        prop_assert_eq!(phi[n], 1.0);
        // Phi_n*(z) = z^n Phi_n(1/z) for real coefficients
        for j in 0..=n {
            prop_assert_eq!(phi_star[j], phi[n - j]);
        }
    }
}

#[test]
fn free_case_is_monomial() {
    let free = opuc_zeros::VerblunskySequence::free();
    let z = c(0.6, -1.1);
    let e = evaluate(&free, 7, z).unwrap();
    let [phi, phi_star, dphi, dphi_star] = e.unscaled();
    assert!(crel_err(phi, z.powi(7)) < 1e-14);
    assert_eq!(phi_star, c(1.0, 0.0));
    assert!(crel_err(dphi, 7.0 * z.powi(6)) < 1e-14);
    assert_eq!(dphi_star, c(0.0, 0.0));
}

#[test]
fn large_degree_stays_finite() {
    let s = opuc_zeros::VerblunskySequence::from_fn("decay", |k| 0.5 / (k as f64 + 1.0));
    let e = evaluate(&s, 4000, c(1.5, 0.5)).unwrap();
    assert!(e.phi.norm().is_finite() && e.phi.norm() > 0.0);
    assert!(e.log_scale > 700.0);
}
