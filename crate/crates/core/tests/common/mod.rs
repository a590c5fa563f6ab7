#![allow(dead_code)]

use num_complex::Complex64;
use opuc_zeros::VerblunskySequence;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn crel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn sequence(values: Vec<f64>) -> VerblunskySequence {
    VerblunskySequence::new(values).unwrap()
}

/// Coefficient vectors of length `len` with entries in `[-bound, bound]`.
pub fn alphas(len: std::ops::RangeInclusive<usize>, bound: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-bound..=bound, len)
}

/// Points `r e^{i theta}` with `r` in `[r0, r1]`.
pub fn polar(r0: f64, r1: f64) -> impl Strategy<Value = Complex64> {
    (r0..=r1, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// `default` cases unless `PROPTEST_CASES` is set.
pub fn cases(default: u32) -> ProptestConfig {
    let n = std::env::var("PROPTEST_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default);
    ProptestConfig::with_cases(n)
}
