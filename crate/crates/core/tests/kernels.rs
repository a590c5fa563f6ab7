mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use opuc_zeros::ensembles::bernstein_szego_moments;
use opuc_zeros::kernels::{christoffel, kernel_bundle, kernel_cd, kernel_direct};
use opuc_zeros::VerblunskySequence;
use proptest::prelude::*;

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn cd_form_matches_direct_sum(
        alpha in alphas(2..=64, 0.9),
        z in polar(0.2, 1.8),
        w in polar(0.2, 1.8),
    ) {
        prop_assume!((1.0 - z * w.conj()).norm() > 1e-3);
        let n = alpha.len();
        let s = sequence(alpha);
        let d = kernel_direct(&s, n, z, w).unwrap().unscaled();
        let cd = kernel_cd(&s, n, z, w).unwrap().unscaled();
        let dz = kernel_direct(&s, n, z, z).unwrap().unscaled();
        let dw = kernel_direct(&s, n, w, w).unwrap().unscaled();
        // Cauchy-Schwarz bounds for |K|, |K10| and |K11| at (z, w)
        let bound = [
            (dz[0].re * dw[0].re).sqrt(),
            (dz[2].re * dw[0].re).sqrt(),
            (dz[2].re * dw[2].re).sqrt(),
        ];
        for i in 0..3 {
            prop_assert!(d[i].norm() <= bound[i] * (1.0 + 1e-12));
            prop_assert!((cd[i] - d[i]).norm() <= 1e-9 * bound[i], "entry {} cd {} direct {}", i, cd[i], d[i]);
        }
    }

    #[test]
    fn diagonal_kernel_is_at_least_one(alpha in alphas(0..=64, 0.95), z in polar(0.0, 2.0)) {
        let n = alpha.len() + 1;
        let k = kernel_direct(&sequence(alpha), n, z, z).unwrap().unscaled()[0];
        prop_assert!(k.re >= 1.0 - 1e-12);
        prop_assert!(k.im.abs() <= 1e-12 * k.re);
    }

    #[test]
    fn cauchy_schwarz(alpha in alphas(0..=64, 0.95), z in polar(0.0, 2.0)) {
        let n = alpha.len() + 1;
        let b = kernel_bundle(&sequence(alpha), n, z).unwrap();
        prop_assert!(b.k_zzbar.norm() <= b.k_zz * (1.0 + 1e-14));
        // |K10(z,z)|^2 <= K(z,z) K11(z,z)
        prop_assert!(b.k10_zz.norm_sqr() <= b.k_zz * b.k11_zz * (1.0 + 1e-12));
    }
}

/// `min int |p|^2 dmu` over `deg p <= n - 1`, `p(z) = 1`, for `mu` given on
/// a uniform circle grid with weights `w`: the constrained least-squares
/// minimum `1 / (v^H G^{-1} v)` with `G` the discrete Gram matrix of
/// monomials and `v_j = conj(z^j)`.
fn discrete_extremal(n: usize, z: Complex64, weights: &[f64]) -> f64 {
    let m = weights.len();
    let nodes: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect();
    let g = DMatrix::from_fn(n, n, |i, j| {
        nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| x.powi(j as i32) * x.powi(i as i32).conj() * *w)
            .sum::<Complex64>()
    });
    let v = DVector::from_fn(n, |j, _| z.powi(j as i32).conj());
    let x = g
        .cholesky()
        .expect("Gram matrix is positive definite")
        .solve(&v);
    1.0 / v.dotc(&x).re
}

#[test]
fn christoffel_is_extremal_for_arclength() {
    let free = VerblunskySequence::free();
    let m = 4096;
    let weights = vec![1.0 / m as f64; m];
    for n in 1..=5 {
        for z in [c(0.3, 0.4), c(-0.9, 0.1), c(1.2, -0.7), c(0.0, 0.0)] {
            let lam = christoffel(&free, n, z).unwrap();
            let ls = discrete_extremal(n, z, &weights);
            assert!((lam - ls).abs() <= 1e-6 * lam, "n={n} z={z}: {lam} vs {ls}");
        }
    }
}

#[test]
fn christoffel_is_extremal_for_bernstein_szego_measure() {
    // dmu = dtheta / (2 pi |phi_2(e^{i theta})|^2) for alpha = [0.5, -0.3, 0, ...]
    let s = sequence(vec![0.5, -0.3, 0.0, 0.0, 0.0]);
    let m = 4096;
    let weights: Vec<f64> = (0..m)
        .map(|k| {
            let x = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            let phi = opuc_zeros::szego::evaluate(&s, 2, x).unwrap().unscaled()[0];
            1.0 / (m as f64 * phi.norm_sqr())
        })
        .collect();
    let moments = bernstein_szego_moments(&s, 1, 8192).unwrap();
    assert!((moments[0].re - weights.iter().sum::<f64>()).abs() < 1e-12);
    for n in 1..=5 {
        for z in [c(0.3, 0.4), c(-0.6, -0.5), c(1.1, 0.2)] {
            let lam = christoffel(&s, n, z).unwrap();
            let ls = discrete_extremal(n, z, &weights);
            assert!((lam - ls).abs() <= 1e-6 * lam, "n={n} z={z}: {lam} vs {ls}");
        }
    }
}
