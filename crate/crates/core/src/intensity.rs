//! Real and complex zero intensities of `P_n = sum eta_i phi_i` with i.i.d.
//! standard Gaussian `eta_i`, and their large-`n` limits.
//!
//! Real intensity routes:
//! * kernel form, `sqrt(K K11 - K10^2) / (pi K)` from direct kernel sums;
//! * closed form through `h_n = (1 - x^2) b_n' / (1 - b_n^2)`.
//!
//! Complex intensity routes:
//! * the three-term kernel formula ([`complex_intensity_vanderbei`]);
//! * the three-sum decomposition using degree-`n` values
//!   ([`complex_intensity_sigma`]);
//! * a Gram formulation in real coordinates ([`complex_intensity_gram`]),
//!   which stays accurate as `z` approaches the real axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::kernels::{bundle_slice, KernelBundle};
use crate::szego::{self, pow2, Sweep, VerblunskySequence};

/// Which formula produced an [`IntensityValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    KernelForm,
    ClosedForm,
    SigmaDecomposition,
    Gram,
    Limit,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Route::KernelForm => "kernel_form",
            Route::ClosedForm => "closed_form",
            Route::SigmaDecomposition => "sigma_decomposition",
            Route::Gram => "gram",
            Route::Limit => "limit",
        };
        f.write_str(s)
    }
}

/// An intensity value: zeros per unit length on the real line, or per unit
/// area in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityValue {
    pub z: Complex64,
    pub rho: f64,
    /// Value before clamping round-off negatives to zero. For the real routes
    /// this is the radicand ratio `1 - h^2` (closed form) or
    /// `(K K11 - K10^2) / K^2` (kernel form).
    pub raw: f64,
    /// Estimated relative round-off of `rho` for the three-term and three-sum
    /// formulas, whose final differences cancel near the real line; zero for
    /// the other routes.
    #[serde(default)]
    pub error: f64,
    pub route: Route,
}

impl IntensityValue {
    fn zero(z: Complex64, route: Route) -> Self {
        Self {
            z,
            rho: 0.0,
            raw: 0.0,
            error: 0.0,
            route,
        }
    }
}

/// Below this `|1 - x^2|` the closed real form is refused.
pub const ENDPOINT_CUTOFF: f64 = 1e-3;

/// Absolute floor on `K^2 - |K(z, conj z)|^2` after unscaling.
pub const DEGENERACY_FLOOR: f64 = 1e-300;

/// Relative floor on `(K^2 - |K(z, conj z)|^2) / K^2` for the three-term
/// and three-sum formulas; their round-off grows like the inverse square of
/// this ratio.
pub const RELATIVE_DEGENERACY_FLOOR: f64 = 1e-4;

/// Largest estimated relative round-off for which [`complex_intensity`] keeps
/// the three-term formula instead of switching to the gram route.
pub const VANDERBEI_ERROR_LIMIT: f64 = 1e-10;

fn real_point(x: f64) -> Result<Complex64> {
    if x.is_finite() {
        Ok(Complex64::new(x, 0.0))
    } else {
        Err(Error::domain(x, "point must be finite"))
    }
}

fn need_terms(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("intensity needs n >= 1".into()))
    } else {
        Ok(())
    }
}

/// Real intensity from the kernel form; finite on all of the real line.
pub fn real_intensity_kernel(
    alpha: &VerblunskySequence,
    n: usize,
    x: f64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    let z = real_point(x)?;
    if n == 1 {
        return Ok(IntensityValue::zero(z, Route::KernelForm));
    }
    let coeffs = alpha.prefix(n - 1)?;
    Ok(real_kernel_slice(&coeffs, n, x))
}

pub(crate) fn real_kernel_slice(alpha: &[f64], n: usize, x: f64) -> IntensityValue {
    let z = Complex64::new(x, 0.0);
    let (b, _) = bundle_slice(alpha, n, z, false);
    let k = b.k_zz;
    let k10 = b.k10_zz.re;
    let raw = (k * b.k11_zz - k10 * k10) / (k * k);
    IntensityValue {
        z,
        rho: raw.max(0.0).sqrt() / PI,
        raw,
        error: 0.0,
        route: Route::KernelForm,
    }
}

/// `(h, 1 - h^2)` for `h = (1 - x^2) f' / (1 - f^2)` with `f = b_m(x)` or,
/// when `shifted`, `f = x b_m(x)`, where `m = alpha.len()`. Evaluated in
/// double-double so that `1 - h^2` keeps its relative accuracy as `|h| -> 1`.
pub(crate) fn h_parts(alpha: &[f64], x: f64, shifted: bool) -> (f64, f64) {
    let [p, ps, dp, dps] = szego::monic_real(alpha, x);
    let (num, den) = if shifted {
        let xp = p * x;
        ((ps * (p + dp * x) - xp * dps), (ps - xp) * (ps + xp))
    } else {
        (dp * ps - p * dps, (ps - p) * (ps + p))
    };
    let t = TwoFloat::new_sub(1.0, x) * TwoFloat::new_add(1.0, x) * num;
    let d = den.hi();
    // 1 - h^2 = (den - t)(den + t) / den^2; only the differences need the extra precision
    (t.hi() / d, ((den - t).hi() / d) * ((den + t).hi() / d))
}

/// `h_n(x) = (1 - x^2) b_n'(x) / (1 - b_n(x)^2)` for `|x| < 1`.
pub fn h_closed(alpha: &VerblunskySequence, n: usize, x: f64) -> Result<f64> {
    check_open_interval(x)?;
    Ok(h_parts(&alpha.prefix(n)?, x, false).0)
}

/// `h_n` through `s = x b_{n-1}(x)`: `(1 - x^2) s' / (1 - s^2)`. Needs only
/// `n - 1` coefficients.
pub fn h_shifted(alpha: &VerblunskySequence, n: usize, x: f64) -> Result<f64> {
    need_terms(n)?;
    check_open_interval(x)?;
    Ok(h_parts(&alpha.prefix(n - 1)?, x, true).0)
}

fn check_open_interval(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(x, "h_n is evaluated on (-1, 1)"))
    }
}

/// Real intensity from the closed form. Points with `|1 - x^2| <= 1e-3` are
/// refused; for `|x| > 1` the value is mapped from `1/x`.
pub fn real_intensity_closed(
    alpha: &VerblunskySequence,
    n: usize,
    x: f64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    let z = real_point(x)?;
    if (1.0 - x * x).abs() <= ENDPOINT_CUTOFF {
        return Err(Error::domain(
            x,
            "too close to +-1 for the closed form; use the kernel form",
        ));
    }
    let (t, jac) = if x.abs() > 1.0 {
        (1.0 / x, 1.0 / (x * x))
    } else {
        (x, 1.0)
    };
    let (_, raw) = h_parts(&alpha.prefix(n)?, t, false);
    Ok(IntensityValue {
        z,
        rho: jac * raw.max(0.0).sqrt() / (PI * (1.0 - t * t)),
        raw,
        error: 0.0,
        route: Route::ClosedForm,
    })
}

/// Closed form away from `+-1`, kernel form near it.
pub fn real_intensity(alpha: &VerblunskySequence, n: usize, x: f64) -> Result<IntensityValue> {
    if x.is_finite() && (1.0 - x * x).abs() > ENDPOINT_CUTOFF {
        real_intensity_closed(alpha, n, x)
    } else {
        real_intensity_kernel(alpha, n, x)
    }
}

fn check_off_axis(z: Complex64) -> Result<()> {
    szego::check_point(z)?;
    if z.im == 0.0 {
        return Err(Error::domain(
            z,
            "complex intensity is defined off the real line",
        ));
    }
    Ok(())
}

/// `D = K^2 - |K(z, conj z)|^2` in the bundle scale, with both guards.
fn degeneracy(b: &KernelBundle, relative: bool) -> Result<f64> {
    let d = b.k_zz * b.k_zz - b.k_zzbar.norm_sqr();
    let log_d = d.ln() + 2.0 * b.log_scale;
    if !(d > 0.0) || log_d <= DEGENERACY_FLOOR.ln() {
        return Err(Error::domain(
            b.z,
            "kernel determinant vanishes (point too close to the real line)",
        ));
    }
    if relative && d < RELATIVE_DEGENERACY_FLOOR * b.k_zz * b.k_zz {
        return Err(Error::domain(
            b.z,
            "kernel determinant below the relative floor; use the gram route",
        ));
    }
    Ok(d)
}

/// Three-term kernel formula for the complex intensity.
///
/// Outside the disk the kernel sums are dominated by their top term and the
/// determinant cancels, so the formula is applied at `1/z` and mapped back
/// with `rho(z) = rho(1/z) / |z|^4` (the zero set is invariant in law under
/// `z -> 1/z`).
pub fn complex_intensity_vanderbei(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    check_off_axis(z)?;
    if n == 1 {
        return Ok(IntensityValue::zero(z, Route::KernelForm));
    }
    let coeffs = alpha.prefix(n - 1)?;
    vanderbei_slice(&coeffs, n, z)
}

fn vanderbei_slice(coeffs: &[f64], n: usize, z: Complex64) -> Result<IntensityValue> {
    let (w, jacobian) = if z.norm_sqr() > 1.0 {
        let w = z.inv();
        (w, w.norm_sqr() * w.norm_sqr())
    } else {
        (z, 1.0)
    };
    let (b, _) = bundle_slice(coeffs, n, w, false);
    let v = vanderbei_from_bundle(&b)?;
    Ok(IntensityValue {
        z,
        rho: v.rho * jacobian,
        raw: v.raw * jacobian,
        ..v
    })
}

fn vanderbei_from_bundle(b: &KernelBundle) -> Result<IntensityValue> {
    let d = degeneracy(b, true)?;
    let k = b.k_zz;
    let sd = d.sqrt();
    let cross = (b.k_zzbar * b.k10_zz * b.k10_zbarz).re;
    let first = b.k11_zz / sd;
    let spread = k * (b.k10_zz.norm_sqr() + b.k10_zzbar.norm_sqr());
    let second = (spread - 2.0 * cross) / (d * sd);
    let diff = first - second;
    let raw = diff / PI;
    // both differences plus the conditioning of d; 4 is an empirical margin
    let terms = first.abs() + (spread + 2.0 * cross.abs()) / (d * sd);
    let error =
        4.0 * f64::EPSILON * (terms + (k * k / d) * (first.abs() + second.abs())) / diff.abs();
    Ok(IntensityValue {
        z: b.z,
        rho: raw.max(0.0),
        raw,
        error,
        route: Route::KernelForm,
    })
}

/// Complex intensity as `(S1 - S2 + S3) / (pi D^(3/2))` with sums built from
/// `K(z,z)`, `K(z, conj z)` and the degree-`n` values at `z`.
pub fn complex_intensity_sigma(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    check_off_axis(z)?;
    if (z.norm() - 1.0).abs() < 1e-12 {
        return Err(Error::domain(
            z,
            "the three-sum form is singular on the unit circle",
        ));
    }
    if n == 1 {
        return Ok(IntensityValue::zero(z, Route::SigmaDecomposition));
    }
    let coeffs = alpha.prefix(n)?;
    let (b, edge) = bundle_slice(&coeffs, n, z, true);
    let e = edge.expect("edge requested");
    let d = degeneracy(&b, true)?;
    let k = b.k_zz;
    let kb2 = b.k_zzbar.norm_sqr();
    let m2 = 1.0 - z.norm_sqr();
    let m4 = m2 * m2;
    let q2 = (1.0 - z * z).norm_sqr();
    let w = e.dphi_star * e.phi - e.dphi * e.phi_star;
    let (t1, t2) = (k * k * k / m4, k * kb2 * (2.0 / m4 - 1.0 / q2));
    let s1 = t1 - t2;
    let s2 = 8.0 * z.im * (e.phi * e.phi_star.conj()).im * (b.k_zzbar.conj() * w).re / (m4 * q2);
    // 1/q2 - 1/m4 = -4 y^2 / (m4 q2) exactly
    let s3 = -4.0 * z.im * z.im * k * w.norm_sqr() / (m4 * q2);
    let sum = s1 - s2 + s3;
    // edge values and kernel sums carry O(n) roundings; 16 is an empirical margin
    let cancel = n as f64 * (t1.abs() + t2.abs() + s2.abs() + s3.abs()) / sum.abs();
    let error = 16.0 * f64::EPSILON * (cancel + k * k / d);
    let raw = sum / (PI * d * d.sqrt());
    Ok(IntensityValue {
        z,
        rho: raw.max(0.0),
        raw,
        error,
        route: Route::SigmaDecomposition,
    })
}

/// Complex intensity in real coordinates.
///
/// With `phi_i = a_i + i b_i` and `phi_i' = p_i + i q_i`, the intensity is
/// `(|p_perp|^2 + |q_perp|^2) / (2 pi sqrt(det G))`, where `G` is the Gram
/// matrix of `a, b` and `_perp` is the residual after projection onto their
/// span. Residuals are formed explicitly, so nothing cancels as `Im z -> 0`.
pub fn complex_intensity_gram(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    check_off_axis(z)?;
    if n == 1 {
        return Ok(IntensityValue::zero(z, Route::Gram));
    }
    let coeffs = alpha.prefix(n - 1)?;
    gram_slice(&coeffs, n, z)
}

pub(crate) fn gram_slice(alpha: &[f64], n: usize, z: Complex64) -> Result<IntensityValue> {
    let mut s = Sweep::new(z);
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    let mut exps = Vec::with_capacity(n);
    for i in 0..n {
        phi.push(s.phi);
        dphi.push(s.dphi);
        exps.push(s.exp2);
        if i + 1 < n {
            s.step(alpha[i]);
        }
    }
    let top = exps.iter().copied().max().unwrap_or(0);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let f = pow2(exps[i] - top);
        a.push(phi[i].re * f);
        b.push(phi[i].im * f);
        p.push(dphi[i].re * f);
        q.push(dphi[i].im * f);
    }

    let na = norm(&a);
    if na == 0.0 {
        return Err(Error::Numerical("vanishing kernel".into()));
    }
    let u1: Vec<f64> = a.iter().map(|v| v / na).collect();
    let b_perp = residual(&b, &[&u1]);
    let nb = norm(&b_perp);
    if !(nb > 0.0)
        || (nb.ln() + na.ln() + 2.0 * f64::from(top) * std::f64::consts::LN_2)
            <= DEGENERACY_FLOOR.ln() / 2.0
    {
        return Err(Error::domain(
            z,
            "kernel determinant vanishes (point too close to the real line)",
        ));
    }
    let u2: Vec<f64> = b_perp.iter().map(|v| v / nb).collect();
    let rp = norm(&residual(&p, &[&u1, &u2]));
    let rq = norm(&residual(&q, &[&u1, &u2]));
    let raw = (rp * rp + rq * rq) / (2.0 * PI * na * nb);
    Ok(IntensityValue {
        z,
        rho: raw,
        raw,
        error: 0.0,
        route: Route::Gram,
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// Residual of `v` against orthonormal vectors, projected twice.
fn residual(v: &[f64], basis: &[&Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for u in basis {
            let c = dot(&r, u);
            r.iter_mut().zip(u.iter()).for_each(|(x, y)| *x -= c * y);
        }
    }
    r
}

/// Complex intensity: the three-term formula where it is well conditioned,
/// the Gram route otherwise.
pub fn complex_intensity(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<IntensityValue> {
    need_terms(n)?;
    check_off_axis(z)?;
    if n == 1 {
        return Ok(IntensityValue::zero(z, Route::KernelForm));
    }
    let coeffs = alpha.prefix(n - 1)?;
    match vanderbei_slice(&coeffs, n, z) {
        Ok(v) if v.error <= VANDERBEI_ERROR_LIMIT => Ok(v),
        Ok(_) | Err(Error::OutOfDomain { .. }) => gram_slice(&coeffs, n, z),
        Err(e) => Err(e),
    }
}

/// Large-`n` complex density off the real line and the unit circle when
/// `alpha_k -> 0`:
/// `sqrt(1 - |(1 - |z|^2) / (1 - z^2)|^2) / (pi (1 - |z|^2)^2)`.
pub fn limit_complex_density(z: Complex64) -> Result<f64> {
    szego::check_point(z)?;
    let m = 1.0 - z.norm_sqr();
    if z.im == 0.0 || m == 0.0 {
        return Err(Error::domain(
            z,
            "limit density is defined off the real line and the unit circle",
        ));
    }
    // 1 - |(1-|z|^2)/(1-z^2)|^2 = 4 Im(z)^2 / |1-z^2|^2
    Ok(2.0 * z.im.abs() / (PI * m * m * (1.0 - z * z).norm()))
}

/// Large-`n` real density `sqrt(1 - h^2) / (pi |1 - x^2|)` with
/// `h = b'(x)(1 - x^2) / (1 - b(x)^2)`, where `limit` returns `(b, b')`.
/// `None` is the case `b = 0`, giving `1 / (pi |1 - x^2|)`.
pub fn limit_real_density(x: f64, limit: Option<&dyn Fn(f64) -> (f64, f64)>) -> Result<f64> {
    let m = 1.0 - x * x;
    if !x.is_finite() || m == 0.0 {
        return Err(Error::domain(x, "limit density is singular at +-1"));
    }
    let h = match limit {
        None => 0.0,
        Some(f) => {
            let (b, db) = f(x);
            db * m / (1.0 - b * b)
        }
    };
    Ok((1.0 - h * h).max(0.0).sqrt() / (PI * m.abs()))
}

const SERIES_RADIUS: f64 = 0.5;

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// `H'(tau) / H(tau)` for `H(tau) = (e^tau - 1) / tau`.
pub fn h_log_derivative(tau: f64) -> f64 {
    if tau.abs() < SERIES_RADIUS {
        let c = [
            1.0 / 12.0,
            -1.0 / 720.0,
            1.0 / 30240.0,
            -1.0 / 1_209_600.0,
            2.087_675_698_786_810e-8,
            -5.284_190_138_687_493e-10,
            1.338_253_653_068_468e-11,
        ];
        0.5 + tau * horner(&c, tau * tau)
    } else {
        0.5 + 0.5 / (0.5 * tau).tanh() - 1.0 / tau
    }
}

/// `(log H)''(tau) = 1/tau^2 - 1 / (4 sinh^2(tau/2))`.
pub fn log_h_second_derivative(tau: f64) -> f64 {
    if tau.abs() < SERIES_RADIUS {
        let c = [
            1.0 / 12.0,
            -1.0 / 240.0,
            1.0 / 6048.0,
            -1.0 / 172_800.0,
            1.0 / 5_322_240.0,
            -5.812_609_152_556_243e-9,
            1.739_729_748_989_008e-10,
        ];
        horner(&c, tau * tau)
    } else {
        let s = (0.5 * tau).sinh();
        1.0 / (tau * tau) - 1.0 / (4.0 * s * s)
    }
}

/// Limiting density of the rescaled complex intensity near the unit circle,
/// `(1 / 2 pi) (H'/H)'(tau)`.
pub fn scaling_limit_density(tau: f64) -> f64 {
    log_h_second_derivative(tau) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn free_degree_two() {
        let free = VerblunskySequence::free();
        let v = real_intensity_kernel(&free, 2, 0.0).unwrap();
        assert!(close(v.rho, 1.0 / PI, 1e-15));
        for x in [-3.0, -1.0, -0.2, 0.7, 1.0, 5.0] {
            let v = real_intensity_kernel(&free, 2, x).unwrap();
            assert!(close(v.rho, 1.0 / (PI * (1.0 + x * x)), 1e-14), "{x}");
        }
    }

    #[test]
    fn single_term_has_no_zeros() {
        let alpha = VerblunskySequence::new(vec![0.4]).unwrap();
        for x in [-2.0, 0.0, 0.5, 1.0] {
            assert_eq!(real_intensity_kernel(&alpha, 1, x).unwrap().rho, 0.0);
            assert!(real_intensity_closed(&alpha, 1, x + 0.1).unwrap().rho < 1e-15);
        }
        assert_eq!(complex_intensity(&alpha, 1, c(0.3, 0.3)).unwrap().rho, 0.0);
    }

    #[test]
    fn kac_degree_three() {
        let free = VerblunskySequence::free();
        let h = h_closed(&free, 3, 0.5).unwrap();
        assert!(close(h, 4.0 / 7.0, 1e-14));
        // rho = sqrt(1 - 16/49) / (0.75 pi) = sqrt(33) / (5.25 pi)
        let v = real_intensity_closed(&free, 3, 0.5).unwrap();
        assert!(close(v.rho, 33f64.sqrt() / (5.25 * PI), 1e-14), "{}", v.rho);
        assert!((v.rho - 0.3482958).abs() < 5e-7);
        let k = real_intensity_kernel(&free, 3, 0.5).unwrap();
        assert!(close(k.rho, v.rho, 1e-13));
    }

    #[test]
    fn closed_form_refuses_endpoints() {
        let free = VerblunskySequence::free();
        assert!(real_intensity_closed(&free, 5, 1.0).is_err());
        assert!(real_intensity_closed(&free, 5, -0.9999).is_err());
        let v = real_intensity(&free, 5, 1.0).unwrap();
        assert_eq!(v.route, Route::KernelForm);
        assert!(v.rho.is_finite() && v.rho > 0.0);
    }

    #[test]
    fn inversion_symmetry() {
        let alpha = VerblunskySequence::new(vec![0.3, -0.5, 0.1, 0.6, -0.2]).unwrap();
        for x in [0.2, -0.45, 0.8] {
            let inner = real_intensity_kernel(&alpha, 5, x).unwrap().rho;
            let outer = real_intensity_kernel(&alpha, 5, 1.0 / x).unwrap().rho;
            assert!(close(outer, x * x * inner, 1e-12));
            let closed = real_intensity_closed(&alpha, 5, 1.0 / x).unwrap().rho;
            assert!(close(closed, outer, 1e-10));
        }
    }

    #[test]
    fn h_routes_agree() {
        let alpha = VerblunskySequence::new(vec![0.3, -0.5, 0.1, 0.6, -0.2, 0.7]).unwrap();
        for n in 1..=6 {
            for x in [-0.9, -0.3, 0.0, 0.55, 0.95] {
                let a = h_closed(&alpha, n, x).unwrap();
                let b = h_shifted(&alpha, n, x).unwrap();
                assert!((a - b).abs() < 1e-12, "{n} {x}: {a} {b}");
            }
        }
    }

    #[test]
    fn complex_routes_agree() {
        let alpha =
            VerblunskySequence::new(vec![0.3, -0.5, 0.1, 0.6, -0.2, 0.7, -0.8, 0.25]).unwrap();
        for z in [c(0.4, 0.5), c(-0.7, 0.3), c(1.5, 0.9), c(-0.2, -0.6)] {
            let v = complex_intensity_vanderbei(&alpha, 8, z).unwrap().rho;
            let s = complex_intensity_sigma(&alpha, 8, z).unwrap().rho;
            let g = complex_intensity_gram(&alpha, 8, z).unwrap().rho;
            assert!(close(s, v, 1e-10), "{z}: {v} {s}");
            assert!(close(g, v, 1e-10), "{z}: {v} {g}");
        }
    }

    #[test]
    fn conjugation_is_exact() {
        let alpha = VerblunskySequence::new(vec![0.3, -0.5, 0.1, 0.6]).unwrap();
        for z in [c(0.4, 0.5), c(0.7, 1e-6), c(2.0, 0.3)] {
            let a = complex_intensity(&alpha, 5, z).unwrap().rho;
            let b = complex_intensity(&alpha, 5, z.conj()).unwrap().rho;
            assert_eq!(a.to_bits(), b.to_bits());
            let a = complex_intensity_gram(&alpha, 5, z).unwrap().rho;
            let b = complex_intensity_gram(&alpha, 5, z.conj()).unwrap().rho;
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn gram_near_real_axis() {
        // Free case, n = 2: P = eta_0 + eta_1 z has its zero at -eta_0/eta_1,
        // which is real, so the complex intensity vanishes identically.
        let free = VerblunskySequence::free();
        let v = complex_intensity_gram(&free, 2, c(0.3, 1e-7)).unwrap();
        assert!(v.rho.abs() < 1e-12);
        assert!(complex_intensity_vanderbei(&free, 3, c(0.3, 1e-7)).is_err());
        assert!(complex_intensity(&free, 3, c(0.3, 0.0)).is_err());
        let g = complex_intensity(&free, 3, c(0.3, 1e-7)).unwrap();
        assert_eq!(g.route, Route::Gram);
    }

    #[test]
    fn large_n_approaches_limit() {
        let free = VerblunskySequence::free();
        let v = complex_intensity(&free, 600, c(0.0, 0.5)).unwrap().rho;
        let lim = limit_complex_density(c(0.0, 0.5)).unwrap();
        assert!(close(lim, 0.8 / (0.5625 * PI), 1e-14));
        assert!(close(v, lim, 1e-9), "{v} {lim}");
    }

    #[test]
    fn limit_complex_examples() {
        assert!(limit_complex_density(c(0.5, 0.0)).is_err());
        assert!(limit_complex_density(c(0.0, 1.0)).is_err());
        // z = 2i: 1 - |z|^2 = -3, 1 - z^2 = 5, sqrt(1 - 9/25) = 0.8
        let v = limit_complex_density(c(0.0, 2.0)).unwrap();
        assert!(close(v, 0.8 / (9.0 * PI), 1e-14));
        let tiny = limit_complex_density(c(0.3, 1e-12)).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-11);
    }

    #[test]
    fn limit_real_examples() {
        assert!(close(
            limit_real_density(0.0, None).unwrap(),
            1.0 / PI,
            1e-15
        ));
        assert!(close(
            limit_real_density(3.0, None).unwrap(),
            0.0397887357729738,
            1e-12
        ));
        assert!(limit_real_density(1.0, None).is_err());
        let kac = |x: f64| (x.powi(3), 3.0 * x * x);
        let v = limit_real_density(0.5, Some(&kac)).unwrap();
        let free = VerblunskySequence::free();
        let w = real_intensity_closed(&free, 3, 0.5).unwrap().rho;
        assert!(close(v, w, 1e-13));
    }

    #[test]
    fn scaling_limit_values() {
        assert!(close(scaling_limit_density(0.0), 1.0 / (24.0 * PI), 1e-15));
        for tau in [-7.0, -0.3, -0.05, 0.0, 0.02, 0.5, 3.0] {
            let s = h_log_derivative(tau) + h_log_derivative(-tau);
            assert!((s - 1.0).abs() < 1e-15, "{tau}");
        }
        assert!(h_log_derivative(-800.0).abs() < 2e-3);
        assert!(h_log_derivative(-1e8) < 1e-7);
        // series and closed form meet at |tau| = 0.5
        for t in [-0.5, 0.5] {
            let a = log_h_second_derivative(t * (1.0 - 1e-15));
            let b = log_h_second_derivative(t * (1.0 + 1e-15));
            assert!((a - b).abs() < 1e-15, "{a} {b}");
            let a = h_log_derivative(t * (1.0 - 1e-15));
            let b = h_log_derivative(t * (1.0 + 1e-15));
            assert!((a - b).abs() < 1e-15, "{a} {b}");
        }
        // reference values computed in extended precision
        assert!(close(
            log_h_second_derivative(0.3),
            0.0829596684125909,
            1e-14
        ));
        assert!(close(
            log_h_second_derivative(2.0),
            0.06898458475842238,
            1e-14
        ));
    }
}
