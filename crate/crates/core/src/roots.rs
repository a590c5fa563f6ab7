//! Polynomial roots as eigenvalues of a balanced companion matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

/// Parlett–Reinsch balancing by powers of two (exact diagonal similarity).
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix2 = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= radix2;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= radix2;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All complex roots of `sum coeffs[k] z^k` (lowest degree first).
///
/// Trailing zero coefficients are dropped; a polynomial of degree zero has
/// no roots.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(
            "non-finite polynomial coefficient".into(),
        ));
    }
    let Some(top) = coeffs.iter().rposition(|&c| c != 0.0) else {
        return Err(Error::InvalidParameter(
            "zero polynomial has no well-defined roots".into(),
        ));
    };
    let lead = coeffs[top];
    let deg = top;
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        return Ok(vec![Complex64::new(-coeffs[0] / lead, 0.0)]);
    }
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("leading coefficient underflow".into()));
    }
    let raw = m.clone();
    balance(&mut m);
    let converged = |a: DMatrix<f64>| {
        nalgebra::Schur::try_new(a, f64::EPSILON, 100 * deg).map(|schur| {
            schur
                .complex_eigenvalues()
                .iter()
                .copied()
                .collect::<Vec<_>>()
        })
    };
    if let Some(z) = converged(m.clone()) {
        return Ok(z);
    }
    // Balancing occasionally lands on a matrix where shifted QR stalls.
    if let Some(z) = converged(raw) {
        return Ok(z);
    }
    // Cyclic companion matrices (e.g. z^n - 1) can stall too. An orthogonal
    // similarity breaks the symmetry without moving eigenvalues.
    for step in REFLECTOR_STEPS {
        let h = reflector(deg, step);
        if let Some(z) = converged(&h * &m * &h) {
            return Ok(z);
        }
    }
    aberth(&coeffs[..=deg])
}

/// `p'(z) / p(z)`, through the reversed polynomial outside the unit disk.
fn log_derivative(coeffs: &[f64], z: Complex64) -> Complex64 {
    let horner = |c: &mut dyn Iterator<Item = &f64>, z: Complex64| {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &v in c {
            dp = dp * z + p;
            p = p * z + v;
        }
        (p, dp)
    };
    if z.norm() <= 1.0 {
        let (p, dp) = horner(&mut coeffs.iter().rev(), z);
        dp / p
    } else {
        let y = z.inv();
        let (q, dq) = horner(&mut coeffs.iter(), y);
        let n = (coeffs.len() - 1) as f64;
        y * (n - y * dq / q)
    }
}

const ABERTH_ITERATIONS: usize = 500;

/// Aberth–Ehrlich simultaneous iteration from points on a circle.
fn aberth(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let radius = (coeffs[0].abs() / coeffs[deg].abs())
        .powf(1.0 / deg as f64)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            Complex64::from_polar(
                radius,
                (k as f64 + 0.25) * std::f64::consts::TAU / deg as f64 + 0.4,
            )
        })
        .collect();
    let mut done = vec![false; deg];
    for _ in 0..ABERTH_ITERATIONS {
        for k in 0..deg {
            if done[k] {
                continue;
            }
            let ld = log_derivative(coeffs, z[k]);
            if !ld.is_finite() {
                // exact root
                done[k] = true;
                continue;
            }
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let w = (ld - repulsion).inv();
            z[k] -= w;
            done[k] = w.norm() <= 4.0 * f64::EPSILON * z[k].norm();
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::Numerical(format!(
        "root iteration did not converge (degree {deg})"
    )))
}

const REFLECTOR_STEPS: [f64; 4] = [
    0.618_033_988_749_895,
    0.414_213_562_373_095,
    0.732_050_807_568_877,
    0.236_067_977_499_790,
];

/// Householder reflector `I - 2 v v^T / v^T v` for an irregular `v`.
fn reflector(n: usize, step: f64) -> DMatrix<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * step).fract())
        .collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n, |i, j| {
        f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv
    })
}
