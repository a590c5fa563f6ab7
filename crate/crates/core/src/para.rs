//! Paraorthogonal polynomials `Phi_n(z; beta) = z Phi_{n-1}(z) - beta Phi*_{n-1}(z)`,
//! their zeros on the unit circle, the discrete measure `sigma_n` and the
//! Caratheodory function `F_n(z) = -Phi_n(z; -1) / Phi_n(z; 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::polynomial_roots;
use crate::szego::{self, monic_coefficients, Sweep, SzegoEval, VerblunskySequence};

/// A complex value stored as `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub value: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn unscaled(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }
}

/// Zeros of `Phi_n(z; beta)` with their `sigma_n` weights, sorted by
/// argument in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaSpectrum {
    pub n: usize,
    pub beta: f64,
    pub zeros: Vec<Complex64>,
    pub weights: Vec<f64>,
}

/// Allowed departure from `|zeta| = 1` before projection.
pub const UNIT_CIRCLE_TOLERANCE: f64 = 1e-8;

fn check_beta(beta: f64) -> Result<()> {
    if beta == 1.0 || beta == -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must be +1 or -1, got {beta}"
        )))
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "paraorthogonal degree must be >= 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `(Phi_n(z; beta), Phi_n'(z; beta))` in the scale of `e` (degree `n - 1`
/// orthonormal values), monic normalization dropped.
fn para_from_eval(e: &SzegoEval, beta: f64) -> (Complex64, Complex64) {
    let z = e.z;
    let value = z * e.phi - beta * e.phi_star;
    let deriv = e.phi + z * e.dphi - beta * e.dphi_star;
    (value, deriv)
}

/// Monic `Phi_n(z; beta)` for `beta = +-1`.
pub fn para_poly(alpha: &VerblunskySequence, n: usize, beta: f64, z: Complex64) -> Result<Scaled> {
    check_degree(n)?;
    check_beta(beta)?;
    let e = szego::evaluate(alpha, n - 1, z)?;
    let (value, _) = para_from_eval(&e, beta);
    Ok(Scaled {
        value,
        log_scale: e.log_scale - e.kappa_log,
    })
}

/// Monomial coefficients (lowest first) of the monic `Phi_n(z; beta)`.
pub fn para_coefficients(alpha: &VerblunskySequence, n: usize, beta: f64) -> Result<Vec<f64>> {
    check_degree(n)?;
    check_beta(beta)?;
    let (phi, phi_star) = monic_coefficients(alpha, n - 1)?;
    let mut c = vec![0.0; n + 1];
    for (k, (&p, &ps)) in phi.iter().zip(&phi_star).enumerate() {
        c[k + 1] += p;
        c[k] -= beta * ps;
    }
    Ok(c)
}

/// Zeros of `Phi_n(z; 1)` and the weights `|phi_{n-1}(zeta)|^2 / K_n(zeta, zeta)`.
pub fn para_spectrum(alpha: &VerblunskySequence, n: usize) -> Result<ParaSpectrum> {
    let coeffs = para_coefficients(alpha, n, 1.0)?;
    let prefix = alpha.prefix(n - 1)?;
    let raw = polynomial_roots(&coeffs)?;
    if raw.len() != n {
        return Err(Error::Numerical(format!(
            "expected {n} zeros, found {}",
            raw.len()
        )));
    }
    let mut zeros = Vec::with_capacity(n);
    for z0 in raw {
        let z = polish(&prefix, z0);
        let off = (z.norm() - 1.0).abs();
        if !(off <= UNIT_CIRCLE_TOLERANCE) {
            return Err(Error::Numerical(format!(
                "paraorthogonal zero {z} is {off:e} away from the unit circle"
            )));
        }
        zeros.push(z / z.norm());
    }
    zeros.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let weights = zeros.iter().map(|&z| weight_at(&prefix, z)).collect();
    Ok(ParaSpectrum {
        n,
        beta: 1.0,
        zeros,
        weights,
    })
}

/// Newton iteration on `Phi_n(z; 1)`, projected onto the circle after the
/// first step.
fn polish(alpha: &[f64], z0: Complex64) -> Complex64 {
    let mut z = z0;
    for step in 0..POLISH_STEPS {
        let e = szego::evaluate_slice(alpha, z);
        let (p, dp) = para_from_eval(&e, 1.0);
        if dp.norm() == 0.0 {
            break;
        }
        let dz = p / dp;
        let next = z - dz;
        if step > 0 && dz.norm() <= 4.0 * f64::EPSILON {
            return next / next.norm();
        }
        if step == 0 && (next.norm() - 1.0).abs() > UNIT_CIRCLE_TOLERANCE {
            return next;
        }
        z = next / next.norm();
    }
    z
}

const POLISH_STEPS: usize = 8;

fn weight_at(alpha: &[f64], z: Complex64) -> f64 {
    let mut s = Sweep::new(z);
    let mut k = 0.0;
    for i in 0..=alpha.len() {
        k += s.phi.norm_sqr();
        if i < alpha.len() {
            let shift = s.step(alpha[i]);
            if shift != 0 {
                k *= szego::pow2(-2 * shift);
            }
        }
    }
    s.phi.norm_sqr() / k
}

/// Values of `Phi_n(z; 1)`, `Phi_n(z; -1)` and derivatives, sharing a scale.
fn both_para(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<[Complex64; 4]> {
    check_degree(n)?;
    let e = szego::evaluate(alpha, n - 1, z)?;
    let (p, dp) = para_from_eval(&e, 1.0);
    let (m, dm) = para_from_eval(&e, -1.0);
    let size = (z * e.phi).norm() + e.phi_star.norm();
    if p.norm() <= 1e-14 * size {
        return Err(Error::domain(z, "too close to a pole of F_n"));
    }
    Ok([p, dp, m, dm])
}

/// `F_n(z) = -Phi_n(z; -1) / Phi_n(z; 1)`.
pub fn caratheodory(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<Complex64> {
    let [p, _, m, _] = both_para(alpha, n, z)?;
    Ok(-m / p)
}

/// `F_n'(z) / F_n(z)`.
pub fn caratheodory_log_derivative(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    let [p, dp, m, dm] = both_para(alpha, n, z)?;
    if m.norm() == 0.0 {
        return Err(Error::domain(z, "F_n vanishes"));
    }
    Ok(dm / m - dp / p)
}

/// `F_n(z) = sum_k w_k (zeta_k + z) / (zeta_k - z)` from a computed spectrum.
pub fn caratheodory_integral(spectrum: &ParaSpectrum, z: Complex64) -> Complex64 {
    spectrum
        .zeros
        .iter()
        .zip(&spectrum.weights)
        .map(|(&zeta, &w)| w * (zeta + z) / (zeta - z))
        .sum()
}

/// `h_n(x) = (1 - x^2) / 2 * F_n'(x) / F_n(x)` on `(-1, 1)`.
pub fn h_via_caratheodory(alpha: &VerblunskySequence, n: usize, x: f64) -> Result<f64> {
    if !(x.is_finite() && x.abs() < 1.0) {
        return Err(Error::domain(x, "h_n is evaluated on (-1, 1)"));
    }
    let d = caratheodory_log_derivative(alpha, n, Complex64::new(x, 0.0))?;
    Ok(0.5 * (1.0 - x * x) * d.re)
}
