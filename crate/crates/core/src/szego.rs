//! Orthonormal polynomials on the unit circle via the Szegő recurrence.
//!
//! Everything here is driven by a real Verblunsky sequence `alpha`. The
//! orthonormal pair is advanced as
//!
//! ```text
//! phi_{k+1}  = (z phi_k - alpha_k phi*_k) / sqrt(1 - alpha_k^2)
//! phi*_{k+1} = (phi*_k - alpha_k z phi_k) / sqrt(1 - alpha_k^2)
//! ```
//!
//! together with the differentiated recurrences. Off the unit circle the
//! values grow or decay geometrically, so the four propagated quantities are
//! kept in a shared binary exponent (`log_scale`); every downstream formula
//! is a ratio in which that exponent cancels. Single-point evaluation
//! ([`evaluate`]) runs the monic form in double-double arithmetic; the sweeps
//! behind kernel sums stay in `f64`.

use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Coefficients with `|alpha| >= ALPHA_LIMIT` are rejected.
pub const ALPHA_LIMIT: f64 = 1.0 - 1e-12;

const SCALE_HIGH: f64 = 1e100;
const SCALE_LOW: f64 = 1e-100;

/// Source of coefficients for a lazily extended [`VerblunskySequence`].
pub trait CoefficientStream: Send {
    fn next_coefficient(&mut self) -> Result<f64>;
}

struct FnStream<F> {
    next: usize,
    f: F,
}

impl<F: Fn(usize) -> f64 + Send> CoefficientStream for FnStream<F> {
    fn next_coefficient(&mut self) -> Result<f64> {
        let value = (self.f)(self.next);
        self.next += 1;
        Ok(value)
    }
}

struct SeqInner {
    label: String,
    cache: RwLock<Arc<Vec<f64>>>,
    stream: Option<Mutex<Box<dyn CoefficientStream>>>,
}

/// A real Verblunsky sequence, either finite or backed by a generator.
///
/// Generator-backed sequences are memoized: the first request for `n`
/// coefficients pulls them from the stream, later requests read the cache.
/// Clones share the cache, and concurrent readers are safe.
#[derive(Clone)]
pub struct VerblunskySequence {
    inner: Arc<SeqInner>,
}

/// Immutable snapshot of the first `len` coefficients of a sequence.
#[derive(Clone)]
pub struct Coefficients {
    data: Arc<Vec<f64>>,
    len: usize,
}

impl std::ops::Deref for Coefficients {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data[..self.len]
    }
}

fn check_coefficient(index: usize, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() < ALPHA_LIMIT {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient { index, value })
    }
}

impl VerblunskySequence {
    /// Finite sequence; every entry must satisfy `|alpha_k| < 1 - 1e-12`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (k, &a) in values.iter().enumerate() {
            check_coefficient(k, a)?;
        }
        Ok(Self {
            inner: Arc::new(SeqInner {
                label: format!("explicit[{}]", values.len()),
                cache: RwLock::new(Arc::new(values)),
                stream: None,
            }),
        })
    }

    /// Infinite sequence of zeros (the Kac case `phi_n(z) = z^n`).
    pub fn free() -> Self {
        Self::from_fn("free", |_| 0.0)
    }

    /// Sequence generated on demand by `f(k)`.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(usize) -> f64 + Send + 'static) -> Self {
        Self::from_stream(label, FnStream { next: 0, f })
    }

    pub fn from_stream(label: impl Into<String>, stream: impl CoefficientStream + 'static) -> Self {
        Self {
            inner: Arc::new(SeqInner {
                label: label.into(),
                cache: RwLock::new(Arc::new(Vec::new())),
                stream: Some(Mutex::new(Box::new(stream))),
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// Number of entries for a finite sequence, `None` for generators.
    pub fn len_hint(&self) -> Option<usize> {
        match self.inner.stream {
            Some(_) => None,
            None => Some(self.cached_len()),
        }
    }

    fn cached_len(&self) -> usize {
        self.inner
            .cache
            .read()
            .expect("coefficient cache poisoned")
            .len()
    }

    /// The first `n` coefficients.
    pub fn prefix(&self, n: usize) -> Result<Coefficients> {
        {
            let cache = self.inner.cache.read().expect("coefficient cache poisoned");
            if cache.len() >= n {
                return Ok(Coefficients {
                    data: Arc::clone(&cache),
                    len: n,
                });
            }
        }
        let Some(stream) = &self.inner.stream else {
            return Err(Error::DegreeTooLarge {
                requested: n,
                available: self.cached_len(),
            });
        };
        let mut stream = stream.lock().expect("coefficient stream poisoned");
        let mut cache = self
            .inner
            .cache
            .write()
            .expect("coefficient cache poisoned");
        // Another reader may have extended the cache while we waited.
        if cache.len() < n {
            let values = Arc::make_mut(&mut cache);
            values.reserve(n - values.len());
            while values.len() < n {
                let a = stream.next_coefficient()?;
                check_coefficient(values.len(), a)?;
                values.push(a);
            }
        }
        Ok(Coefficients {
            data: Arc::clone(&cache),
            len: n,
        })
    }

    pub fn get(&self, k: usize) -> Result<f64> {
        Ok(self.prefix(k + 1)?[k])
    }
}

impl fmt::Debug for VerblunskySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VerblunskySequence")
            .field("label", &self.inner.label)
            .field("cached", &self.cached_len())
            .field("finite", &self.inner.stream.is_none())
            .finish()
    }
}

/// Binary exponent that brings `max` back to order one, or 0 if it is
/// already inside the working window.
pub(crate) fn rescale_exponent(max: f64) -> i32 {
    if max > SCALE_HIGH || (max < SCALE_LOW && max > 0.0) {
        max.log2().floor() as i32
    } else {
        0
    }
}

pub(crate) fn pow2(e: i32) -> f64 {
    // powi on 2.0 is exact for the exponents produced by rescale_exponent.
    2f64.powi(e)
}

/// One step-at-a-time pass of the Szegő recurrence at a fixed point.
///
/// True values are the stored ones times `2^exp2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sweep {
    pub z: Complex64,
    pub degree: usize,
    pub phi: Complex64,
    pub phi_star: Complex64,
    pub dphi: Complex64,
    pub dphi_star: Complex64,
    pub exp2: i32,
}

impl Sweep {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            degree: 0,
            phi: Complex64::new(1.0, 0.0),
            phi_star: Complex64::new(1.0, 0.0),
            dphi: Complex64::new(0.0, 0.0),
            dphi_star: Complex64::new(0.0, 0.0),
            exp2: 0,
        }
    }

    /// Advance one degree. Returns the binary shift applied to the stored
    /// values (they were divided by `2^shift`).
    pub fn step(&mut self, alpha: f64) -> i32 {
        let inv = 1.0 / (1.0 - alpha * alpha).sqrt();
        let zphi = self.z * self.phi;
        let dzphi = self.phi + self.z * self.dphi;
        let phi = (zphi - alpha * self.phi_star) * inv;
        let phi_star = (self.phi_star - alpha * zphi) * inv;
        let dphi = (dzphi - alpha * self.dphi_star) * inv;
        let dphi_star = (self.dphi_star - alpha * dzphi) * inv;
        self.phi = phi;
        self.phi_star = phi_star;
        self.dphi = dphi;
        self.dphi_star = dphi_star;
        self.degree += 1;

        let max = phi
            .norm()
            .max(phi_star.norm())
            .max(dphi.norm())
            .max(dphi_star.norm());
        let shift = rescale_exponent(max);
        if shift != 0 {
            let f = pow2(-shift);
            self.phi *= f;
            self.phi_star *= f;
            self.dphi *= f;
            self.dphi_star *= f;
            self.exp2 += shift;
        }
        shift
    }
}

/// Values of `phi_n`, `phi_n*` and their derivatives at one point.
///
/// True values equal the stored ones times `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzegoEval {
    pub n: usize,
    pub z: Complex64,
    pub phi: Complex64,
    pub phi_star: Complex64,
    pub dphi: Complex64,
    pub dphi_star: Complex64,
    pub log_scale: f64,
    /// `log kappa_n`, the log of the leading coefficient of `phi_n`.
    pub kappa_log: f64,
}

impl SzegoEval {
    fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// Unscaled `(phi_n, phi_n*, phi_n', (phi_n*)')`. Overflows for large
    /// `n |log|z||`; prefer ratios of the stored fields.
    pub fn unscaled(&self) -> [Complex64; 4] {
        let s = self.scale();
        [
            self.phi * s,
            self.phi_star * s,
            self.dphi * s,
            self.dphi_star * s,
        ]
    }

    /// Monic `(Phi_n, Phi_n*)` values, unscaled.
    pub fn monic(&self) -> (Complex64, Complex64) {
        let s = (self.log_scale - self.kappa_log).exp();
        (self.phi * s, self.phi_star * s)
    }

    /// `b_n = phi_n / phi_n*`.
    pub fn blaschke(&self) -> Complex64 {
        self.phi / self.phi_star
    }

    /// Derivative of `b_n`.
    pub fn blaschke_derivative(&self) -> Complex64 {
        (self.dphi * self.phi_star - self.phi * self.dphi_star) / (self.phi_star * self.phi_star)
    }

    pub(crate) fn from_sweep(sweep: &Sweep, kappa_log: f64) -> Self {
        Self {
            n: sweep.degree,
            z: sweep.z,
            phi: sweep.phi,
            phi_star: sweep.phi_star,
            dphi: sweep.dphi,
            dphi_star: sweep.dphi_star,
            log_scale: f64::from(sweep.exp2) * std::f64::consts::LN_2,
            kappa_log,
        }
    }
}

pub(crate) fn check_point(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(z, "point must be finite"))
    }
}

/// `log kappa_n = -1/2 sum_{k<n} log(1 - alpha_k^2)` over a slice.
pub(crate) fn kappa_log_of(alpha: &[f64]) -> f64 {
    -0.5 * alpha.iter().map(|a| (-a * a).ln_1p()).sum::<f64>()
}

/// Complex double-double value.
#[derive(Debug, Clone, Copy)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    fn real(v: f64) -> Self {
        Self {
            re: TwoFloat::from(v),
            im: TwoFloat::from(0.0),
        }
    }

    fn mul(self, z: Complex64) -> Self {
        Self {
            re: self.re * z.re - self.im * z.im,
            im: self.re * z.im + self.im * z.re,
        }
    }

    fn scale(self, a: f64) -> Self {
        Self {
            re: self.re * a,
            im: self.im * a,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    fn abs_max(&self) -> f64 {
        self.re.hi().abs().max(self.im.hi().abs())
    }

    fn round(&self) -> Complex64 {
        Complex64::new(self.re.hi(), self.im.hi())
    }
}

/// Binary exponent bringing `max` back into range, or 0.
fn dd_shift(max: f64) -> i32 {
    if max > SCALE_HIGH || (max < SCALE_LOW && max > 0.0) {
        max.log2().floor() as i32
    } else {
        0
    }
}

/// Single-point evaluation. The monic recurrence runs in double-double
/// arithmetic and `kappa_n` enters through `log_scale`, so the rounded
/// values carry a relative error near one ulp.
pub(crate) fn evaluate_slice(alpha: &[f64], z: Complex64) -> SzegoEval {
    let (mut p, mut ps, mut dp, mut dps) =
        (Dd::real(1.0), Dd::real(1.0), Dd::real(0.0), Dd::real(0.0));
    let mut exp2 = 0;
    for &a in alpha {
        let zp = p.mul(z);
        let dzp = p.add(dp.mul(z));
        p = zp.sub(ps.scale(a));
        ps = ps.sub(zp.scale(a));
        dp = dzp.sub(dps.scale(a));
        dps = dps.sub(dzp.scale(a));
        let shift = dd_shift(
            p.abs_max()
                .max(ps.abs_max())
                .max(dp.abs_max())
                .max(dps.abs_max()),
        );
        if shift != 0 {
            let f = pow2(-shift);
            p = p.scale(f);
            ps = ps.scale(f);
            dp = dp.scale(f);
            dps = dps.scale(f);
            exp2 += shift;
        }
    }
    let kappa_log = kappa_log_of(alpha);
    SzegoEval {
        n: alpha.len(),
        z,
        phi: p.round(),
        phi_star: ps.round(),
        dphi: dp.round(),
        dphi_star: dps.round(),
        log_scale: f64::from(exp2) * std::f64::consts::LN_2 + kappa_log,
        kappa_log,
    }
}

/// Monic `(Phi, Phi*, Phi', Phi*')` at real `x` in double-double arithmetic,
/// up to a common power-of-two factor.
pub(crate) fn monic_real(alpha: &[f64], x: f64) -> [TwoFloat; 4] {
    let zero = TwoFloat::from(0.0);
    let one = TwoFloat::from(1.0);
    let (mut p, mut ps, mut dp, mut dps) = (one, one, zero, zero);
    for &a in alpha {
        let xp = p * x;
        let dxp = p + dp * x;
        p = xp - ps * a;
        ps -= xp * a;
        dp = dxp - dps * a;
        dps -= dxp * a;
        let shift = dd_shift(
            p.hi()
                .abs()
                .max(ps.hi().abs())
                .max(dp.hi().abs())
                .max(dps.hi().abs()),
        );
        if shift != 0 {
            let f = pow2(-shift);
            p *= f;
            ps *= f;
            dp *= f;
            dps *= f;
        }
    }
    [p, ps, dp, dps]
}

/// Evaluate `phi_n`, `phi_n*` and derivatives at `z`.
pub fn evaluate(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<SzegoEval> {
    check_point(z)?;
    let coeffs = alpha.prefix(n)?;
    Ok(evaluate_slice(&coeffs, z))
}

/// Relative size below which `phi_n*` is treated as vanishing.
const DENOMINATOR_FLOOR: f64 = 1e-14;

fn checked_blaschke(e: &SzegoEval) -> Result<SzegoEval> {
    let num = e.phi.norm().max(e.dphi.norm()).max(e.dphi_star.norm());
    if e.phi_star.norm() <= DENOMINATOR_FLOOR * num || e.phi_star.norm() == 0.0 {
        return Err(Error::domain(e.z, "phi_n* vanishes"));
    }
    Ok(*e)
}

fn check_closed_disk(z: Complex64) -> Result<()> {
    check_point(z)?;
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::domain(
            z,
            "b_n is evaluated in the closed unit disk; use b_n(1/z) = 1/b_n(z) outside",
        ));
    }
    Ok(())
}

/// The Blaschke quotient `b_n(z) = phi_n(z) / phi_n*(z)` for `|z| <= 1`.
pub fn blaschke(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<Complex64> {
    check_closed_disk(z)?;
    Ok(checked_blaschke(&evaluate(alpha, n, z)?)?.blaschke())
}

/// `(b_n(z), b_n'(z))` for `|z| <= 1`.
pub fn blaschke_with_derivative(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_closed_disk(z)?;
    let e = checked_blaschke(&evaluate(alpha, n, z)?)?;
    Ok((e.blaschke(), e.blaschke_derivative()))
}

/// `log kappa_n`.
pub fn kappa_log(alpha: &VerblunskySequence, n: usize) -> Result<f64> {
    Ok(kappa_log_of(&alpha.prefix(n)?))
}

/// Regularity diagnostic `eps_n = (1/n) log kappa_n`; tends to 0 for
/// regular measures.
pub fn regularity_epsilon(alpha: &VerblunskySequence, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "regularity_epsilon needs n >= 1".into(),
        ));
    }
    Ok(kappa_log(alpha, n)? / n as f64)
}

/// Monomial coefficients (lowest degree first) of the monic pair
/// `(Phi_n, Phi_n*)`.
pub fn monic_coefficients(alpha: &VerblunskySequence, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let coeffs = alpha.prefix(n)?;
    let mut phi = vec![1.0];
    let mut phi_star = vec![1.0];
    for &a in coeffs.iter() {
        let (p, ps) = monic_step(&phi, &phi_star, a);
        phi = p;
        phi_star = ps;
    }
    Ok((phi, phi_star))
}

fn monic_step(phi: &[f64], phi_star: &[f64], a: f64) -> (Vec<f64>, Vec<f64>) {
    let d = phi.len();
    let mut next = vec![0.0; d + 1];
    let mut next_star = vec![0.0; d + 1];
    for j in 0..d {
        next[j + 1] += phi[j];
        next[j] -= a * phi_star[j];
        next_star[j] += phi_star[j];
        next_star[j + 1] -= a * phi[j];
    }
    (next, next_star)
}

/// Monomial coefficients of the orthonormal polynomials `phi_0 .. phi_{n-1}`;
/// row `i` has length `i + 1`.
pub fn orthonormal_coefficients(alpha: &VerblunskySequence, n: usize) -> Result<Vec<Vec<f64>>> {
    let coeffs = alpha.prefix(n.saturating_sub(1))?;
    let mut rows = Vec::with_capacity(n);
    if n == 0 {
        return Ok(rows);
    }
    let mut phi = vec![1.0];
    let mut phi_star = vec![1.0];
    rows.push(phi.clone());
    for &a in coeffs.iter() {
        let inv = 1.0 / (1.0 - a * a).sqrt();
        let (mut p, mut ps) = monic_step(&phi, &phi_star, a);
        p.iter_mut().for_each(|c| *c *= inv);
        ps.iter_mut().for_each(|c| *c *= inv);
        rows.push(p.clone());
        phi = p;
        phi_star = ps;
    }
    Ok(rows)
}
