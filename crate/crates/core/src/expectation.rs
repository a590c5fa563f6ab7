//! Expected zero counts by quadrature of the intensities.
//!
//! Real counts: pieces of the line outside `[-1, 1]` are mapped by `x = 1/u`,
//! which leaves the real intensity invariant as a measure, so every real
//! integral runs over a subinterval of `[-1, 1]`.
//!
//! Complex counts: polar coordinates, with an angular guard band around the
//! real axis and radial breakpoints clustered at the unit circle, where the
//! density concentrates on a `1/n` scale.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::{self, h_log_derivative, ENDPOINT_CUTOFF};
use crate::quadrature::{integrate, integrate_2d, Estimate, Tolerance};
use crate::szego::VerblunskySequence;

/// Half-width (radians) of the excluded band around the real axis.
pub const ANGULAR_GUARD: f64 = 1e-6;

/// A region of the real line or the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Region {
    /// `[a, b]`; infinite endpoints allowed.
    RealInterval {
        a: f64,
        b: f64,
    },
    WholeRealLine,
    /// `{r e^{i theta} : theta in [theta1, theta2), 1 - delta < r < 1 + delta}`.
    AnnularSector {
        theta1: f64,
        theta2: f64,
        delta: f64,
    },
    /// Arc times `r in (1 + tau1 / 2n, 1 + tau2 / 2n)`.
    ScalingWindow {
        theta1: f64,
        theta2: f64,
        tau1: f64,
        tau2: f64,
        n: usize,
    },
    WholePlane,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn check_arc(t1: f64, t2: f64) -> Result<()> {
    if !(t1.is_finite() && t2.is_finite() && t1 < t2 && t2 - t1 <= TAU) {
        return Err(bad(format!(
            "arc [{t1}, {t2}) must satisfy theta1 < theta2 <= theta1 + 2 pi"
        )));
    }
    Ok(())
}

/// `theta` reduced into `[t1, t1 + 2 pi)`.
fn reduce_angle(theta: f64, t1: f64) -> f64 {
    t1 + (theta - t1).rem_euclid(TAU)
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::RealInterval { a, b } => {
                if a.is_nan() || b.is_nan() || a >= b {
                    return Err(bad(format!("real interval needs a < b, got [{a}, {b}]")));
                }
                Ok(())
            }
            Region::WholeRealLine | Region::WholePlane => Ok(()),
            Region::AnnularSector {
                theta1,
                theta2,
                delta,
            } => {
                check_arc(theta1, theta2)?;
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(bad(format!(
                        "annulus half-width delta = {delta} must lie in (0, 1)"
                    )));
                }
                Ok(())
            }
            Region::ScalingWindow {
                theta1,
                theta2,
                tau1,
                tau2,
                n,
            } => {
                check_arc(theta1, theta2)?;
                if !(tau1.is_finite() && tau2.is_finite() && tau1 < tau2) {
                    return Err(bad(format!(
                        "scaling window needs finite tau1 < tau2, got ({tau1}, {tau2})"
                    )));
                }
                if n == 0 || 1.0 + tau1 / (2.0 * n as f64) <= 0.0 {
                    return Err(bad("scaling window radius must stay positive"));
                }
                Ok(())
            }
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Region::RealInterval { .. } | Region::WholeRealLine)
    }

    /// Membership test used for root counting. Real regions contain only
    /// points with zero imaginary part; arcs are half-open.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::RealInterval { a, b } => z.im == 0.0 && z.re >= a && z.re <= b,
            Region::WholeRealLine => z.im == 0.0,
            Region::WholePlane => true,
            Region::AnnularSector {
                theta1,
                theta2,
                delta,
            } => {
                let r = z.norm();
                r > 1.0 - delta && r < 1.0 + delta && reduce_angle(z.arg(), theta1) < theta2
            }
            Region::ScalingWindow {
                theta1,
                theta2,
                tau1,
                tau2,
                n,
            } => {
                let r = z.norm();
                let m = 2.0 * n as f64;
                r > 1.0 + tau1 / m && r < 1.0 + tau2 / m && reduce_angle(z.arg(), theta1) < theta2
            }
        }
    }

    fn arc(&self) -> Option<(f64, f64)> {
        match *self {
            Region::AnnularSector { theta1, theta2, .. }
            | Region::ScalingWindow { theta1, theta2, .. } => Some((theta1, theta2)),
            Region::WholePlane => Some((-PI, PI)),
            _ => None,
        }
    }

    /// Real intervals (as `(a, b)`) where the region meets the real axis.
    fn real_trace(&self) -> Vec<(f64, f64)> {
        let (radial, arc) = match *self {
            Region::AnnularSector {
                theta1,
                theta2,
                delta,
            } => ((1.0 - delta, 1.0 + delta), (theta1, theta2)),
            Region::ScalingWindow {
                theta1,
                theta2,
                tau1,
                tau2,
                n,
            } => {
                let m = 2.0 * n as f64;
                ((1.0 + tau1 / m, 1.0 + tau2 / m), (theta1, theta2))
            }
            Region::WholePlane => return vec![(f64::NEG_INFINITY, f64::INFINITY)],
            _ => return Vec::new(),
        };
        let mut out = Vec::new();
        if reduce_angle(0.0, arc.0) < arc.1 {
            out.push(radial);
        }
        if reduce_angle(PI, arc.0) < arc.1 {
            out.push((-radial.1, -radial.0));
        }
        out
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Region::RealInterval { a, b } => write!(f, "real:{a}:{b}"),
            Region::WholeRealLine => write!(f, "real_line"),
            Region::AnnularSector {
                theta1,
                theta2,
                delta,
            } => write!(f, "annulus:{theta1}:{theta2}:{delta}"),
            Region::ScalingWindow {
                theta1,
                theta2,
                tau1,
                tau2,
                n,
            } => {
                write!(f, "window:{theta1}:{theta2}:{tau1}:{tau2}:{n}")
            }
            Region::WholePlane => write!(f, "plane"),
        }
    }
}

impl From<Region> for String {
    fn from(region: Region) -> String {
        region.to_string()
    }
}

impl TryFrom<String> for Region {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Region {
    type Err = Error;

    /// `real:a:b`, `real_line`, `annulus:theta1:theta2:delta`,
    /// `window:theta1:theta2:tau1:tau2:n`, `plane`. Angles in radians;
    /// `inf`/`-inf` accepted for real endpoints.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let nums = |k: usize| -> Result<Vec<f64>> {
            if parts.len() != k + 1 {
                return Err(bad(format!("region {:?} takes {k} argument(s)", parts[0])));
            }
            parts[1..]
                .iter()
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("cannot parse {p:?} in region {s:?}")))
                })
                .collect()
        };
        let region = match parts[0] {
            "real" => {
                let v = nums(2)?;
                Region::RealInterval { a: v[0], b: v[1] }
            }
            "real_line" => {
                nums(0)?;
                Region::WholeRealLine
            }
            "annulus" => {
                let v = nums(3)?;
                Region::AnnularSector {
                    theta1: v[0],
                    theta2: v[1],
                    delta: v[2],
                }
            }
            "window" => {
                let v = nums(5)?;
                if v[4].fract() != 0.0 || v[4] < 1.0 {
                    return Err(bad("window degree n must be a positive integer"));
                }
                Region::ScalingWindow {
                    theta1: v[0],
                    theta2: v[1],
                    tau1: v[2],
                    tau2: v[3],
                    n: v[4] as usize,
                }
            }
            "plane" => {
                nums(0)?;
                Region::WholePlane
            }
            other => return Err(bad(format!("unknown region kind {other:?}"))),
        };
        region.validate()?;
        Ok(region)
    }
}

fn add(a: Estimate, b: Estimate) -> Estimate {
    Estimate {
        value: a.value + b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
    }
}

const ZERO: Estimate = Estimate {
    value: 0.0,
    error: 0.0,
    evaluations: 0,
};

/// Real intensity on `[-1, 1]` from `n - 1` coefficients: closed form via
/// `x b_{n-1}` away from `+-1`, kernel form near them.
fn real_density(alpha: &[f64], n: usize, x: f64) -> Result<f64> {
    if n == 1 {
        return Ok(0.0);
    }
    if (1.0 - x * x).abs() <= ENDPOINT_CUTOFF {
        return Ok(intensity::real_kernel_slice(alpha, n, x).rho);
    }
    let (_, raw) = intensity::h_parts(alpha, x, true);
    Ok(raw.max(0.0).sqrt() / (PI * (1.0 - x * x)))
}

fn real_breakpoints(n: usize) -> Vec<f64> {
    let mut bp = vec![0.0];
    let mut k = 1.0;
    while k < n as f64 / 2.0 {
        let x = 1.0 - k / n as f64;
        bp.push(x);
        bp.push(-x);
        k *= 4.0;
    }
    bp
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(bad("expected zero counts need n >= 1"))
    } else {
        Ok(())
    }
}

/// Expected number of real zeros of `sum_{i<n} eta_i phi_i` in a real region.
pub fn expected_real_zeros(
    alpha: &VerblunskySequence,
    n: usize,
    region: &Region,
    tol: Tolerance,
) -> Result<Estimate> {
    check_n(n)?;
    region.validate()?;
    let coeffs = alpha.prefix(n - 1)?;
    let f = |x: f64| real_density(&coeffs, n, x);
    let bp = real_breakpoints(n);
    match *region {
        Region::WholeRealLine => {
            let e = integrate(&f, -1.0, 1.0, &bp, tol)?;
            Ok(Estimate {
                value: 2.0 * e.value,
                error: 2.0 * e.error,
                evaluations: e.evaluations,
            })
        }
        Region::RealInterval { a, b } => {
            let mut total = ZERO;
            for (lo, hi) in unit_pieces(a, b) {
                total = add(total, integrate(&f, lo, hi, &bp, tol)?);
            }
            Ok(total)
        }
        _ => Err(bad(format!("{region} is not a real region"))),
    }
}

/// Subintervals of `[-1, 1]` whose real-intensity mass equals that of
/// `[a, b]`, using `x -> 1/x` outside the unit interval.
fn unit_pieces(a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (lo, hi) = (a.max(-1.0), b.min(1.0));
    if lo < hi {
        out.push((lo, hi));
    }
    if b > 1.0 {
        out.push((1.0 / b, 1.0 / a.max(1.0)));
    }
    if a < -1.0 {
        out.push((1.0 / b.min(-1.0), 1.0 / a));
    }
    out.retain(|(l, h)| l < h);
    out
}

/// Expected counts in a planar region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexExpectation {
    /// Non-real zeros (the real axis band is excluded).
    pub complex: Estimate,
    /// Real zeros on the region's trace on the real axis.
    pub real: Estimate,
    pub total: f64,
    /// Large-`n` prediction of the total for scaling windows.
    pub prediction: Option<f64>,
}

/// Radial breakpoints at `1 +- 2^k / n` inside `(lo, hi)`.
fn radial_breakpoints(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut edges = vec![lo];
    let mut k = 1.0;
    let mut inner = Vec::new();
    if lo < 1.0 && hi > 1.0 {
        inner.push(1.0);
    }
    while k <= n as f64 {
        for r in [1.0 - k / n as f64, 1.0 + k / n as f64] {
            if r > lo && r < hi {
                inner.push(r);
            }
        }
        k *= 2.0;
    }
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(hi);
    edges
}

/// Angular cells covering `[t1, t2)` minus guard bands around the real axis.
fn angular_edges(t1: f64, t2: f64) -> Vec<(f64, f64)> {
    let mut cuts = Vec::new();
    let first = (t1 / PI).ceil() as i64;
    let last = (t2 / PI).floor() as i64;
    for k in first..=last {
        cuts.push(k as f64 * PI);
    }
    let mut pieces = Vec::new();
    let mut start = t1;
    for c in cuts.into_iter().chain(std::iter::once(f64::INFINITY)) {
        let end = c.min(t2);
        let lo = if is_axis(start) {
            start + ANGULAR_GUARD
        } else {
            start
        };
        let hi = if is_axis(end) {
            end - ANGULAR_GUARD
        } else {
            end
        };
        if lo < hi {
            pieces.push((lo, hi));
        }
        if c >= t2 {
            break;
        }
        start = c;
    }
    pieces
}

fn is_axis(theta: f64) -> bool {
    let k = (theta / PI).round();
    (theta - k * PI).abs() < 1e-15 * (1.0 + theta.abs())
}

/// Complex intensity integrand from `n - 1` coefficients.
fn complex_density(alpha: &[f64], n: usize, z: Complex64) -> Result<f64> {
    if n == 1 {
        return Ok(0.0);
    }
    Ok(intensity::gram_slice(alpha, n, z)?.rho)
}

fn polar_integral<F>(f: &F, radial: &[f64], arc: (f64, f64), tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let mut total = ZERO;
    for (lo, hi) in angular_edges(arc.0, arc.1) {
        let width = hi - lo;
        let pieces = ((width / (PI / 4.0)).ceil() as usize).max(1);
        let theta: Vec<f64> = (0..=pieces)
            .map(|k| lo + width * k as f64 / pieces as f64)
            .collect();
        total = add(total, integrate_2d(f, radial, &theta, tol)?);
    }
    Ok(total)
}

/// Expected zeros in an annular sector, scaling window or the whole plane.
pub fn expected_complex_zeros(
    alpha: &VerblunskySequence,
    n: usize,
    region: &Region,
    tol: Tolerance,
) -> Result<ComplexExpectation> {
    check_n(n)?;
    region.validate()?;
    let coeffs = alpha.prefix(n - 1)?;
    let arc = region
        .arc()
        .ok_or_else(|| bad(format!("{region} is not a planar region")))?;
    let (complex, prediction) = match *region {
        Region::AnnularSector { delta, .. } => {
            let f =
                |r: f64, t: f64| Ok(r * complex_density(&coeffs, n, Complex64::from_polar(r, t))?);
            (
                polar_integral(
                    &f,
                    &radial_breakpoints(n, 1.0 - delta, 1.0 + delta),
                    arc,
                    tol,
                )?,
                None,
            )
        }
        Region::ScalingWindow {
            tau1, tau2, n: wn, ..
        } => {
            let m = 2.0 * wn as f64;
            let f = |tau: f64, t: f64| {
                let r = 1.0 + tau / m;
                Ok(r / m * complex_density(&coeffs, n, Complex64::from_polar(r, t))?)
            };
            let mut edges = vec![tau1];
            for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
                if k > tau1 && k < tau2 {
                    edges.push(k);
                }
            }
            edges.push(tau2);
            let pred = wn as f64 * (arc.1 - arc.0) / TAU
                * (h_log_derivative(tau2) - h_log_derivative(tau1));
            (polar_integral(&f, &edges, arc, tol)?, Some(pred))
        }
        Region::WholePlane => {
            // |z| > 1 folded onto the disk by z = 1/u, dA(z) = |u|^-4 dA(u)
            let f = |r: f64, t: f64| {
                let inner = complex_density(&coeffs, n, Complex64::from_polar(r, t))?;
                let outer = complex_density(&coeffs, n, Complex64::from_polar(1.0 / r, -t))?;
                Ok(r * inner + outer / (r * r * r))
            };
            let half = polar_integral(&f, &radial_breakpoints(n, 0.0, 1.0), (0.0, PI), tol)?;
            (
                Estimate {
                    value: 2.0 * half.value,
                    error: 2.0 * half.error,
                    evaluations: half.evaluations,
                },
                None,
            )
        }
        _ => unreachable!("arc() is None for real regions"),
    };
    let mut real = ZERO;
    for (a, b) in region.real_trace() {
        let piece = if a == f64::NEG_INFINITY && b == f64::INFINITY {
            Region::WholeRealLine
        } else {
            Region::RealInterval { a, b }
        };
        real = add(real, expected_real_zeros(alpha, n, &piece, tol)?);
    }
    Ok(ComplexExpectation {
        complex,
        real,
        total: complex.value + real.value,
        prediction,
    })
}

/// Expected number of zeros in any region.
pub fn expected_zeros(
    alpha: &VerblunskySequence,
    n: usize,
    region: &Region,
    tol: Tolerance,
) -> Result<Estimate> {
    if region.is_real() {
        expected_real_zeros(alpha, n, region, tol)
    } else {
        let e = expected_complex_zeros(alpha, n, region, tol)?;
        Ok(Estimate {
            value: e.total,
            error: e.complex.error + e.real.error,
            evaluations: e.complex.evaluations + e.real.evaluations,
        })
    }
}

/// Real plus complex expected counts over the whole plane, to be compared
/// with the almost-sure degree `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub n: usize,
    pub real: Estimate,
    pub complex: Estimate,
    pub total: f64,
    pub expected: f64,
    pub discrepancy: f64,
}

pub fn conservation_check(
    alpha: &VerblunskySequence,
    n: usize,
    tol: Tolerance,
) -> Result<ConservationReport> {
    let e = expected_complex_zeros(alpha, n, &Region::WholePlane, tol)?;
    let expected = n as f64 - 1.0;
    Ok(ConservationReport {
        n,
        real: e.real,
        complex: e.complex,
        total: e.total,
        expected,
        discrepancy: e.total - expected,
    })
}

/// Fraction of the circle covered by an arc, `|S| / 2 pi`.
pub fn arc_fraction(theta1: f64, theta2: f64) -> f64 {
    (theta2 - theta1) / TAU
}
