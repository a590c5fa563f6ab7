//! Named Verblunsky coefficient generators and the point-mass update.
//!
//! Text syntax (used by the CLI and config files):
//!
//! ```text
//! free
//! constant:<a>
//! power_decay:<c>:<p>          alpha_0 = c, alpha_k = c k^-p
//! power_tail:<c>:<p>:<start>   alpha_k = 0 for k < start, c k^-p after
//! explicit:<a0>,<a1>,...
//! geronimus:<t>:<base>         mu = t nu + (1 - t) delta_1, nu from <base>
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::szego::{self, CoefficientStream, VerblunskySequence, ALPHA_LIMIT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EnsembleSpec {
    Free,
    Constant { a: f64 },
    PowerDecay { c: f64, p: f64 },
    PowerTail { c: f64, p: f64, start: usize },
    Explicit(Vec<f64>),
    Geronimus { base: Box<EnsembleSpec>, t: f64 },
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn inside(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x.abs() < ALPHA_LIMIT {
        Ok(())
    } else {
        Err(bad(format!(
            "{what} = {x} must lie strictly inside (-1, 1)"
        )))
    }
}

fn positive_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("decay exponent p = {p} must be positive")))
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::Free => Ok(()),
            EnsembleSpec::Constant { a } => inside(*a, "a"),
            EnsembleSpec::PowerDecay { c, p } => {
                positive_exponent(*p)?;
                inside(*c, "c")
            }
            EnsembleSpec::PowerTail { c, p, start } => {
                positive_exponent(*p)?;
                if *start == 0 {
                    return Err(bad("power_tail start index must be >= 1"));
                }
                inside(c * (*start as f64).powf(-p), "c start^-p")
            }
            EnsembleSpec::Explicit(values) => {
                for (k, &a) in values.iter().enumerate() {
                    if !(a.is_finite() && a.abs() < ALPHA_LIMIT) {
                        return Err(Error::InvalidCoefficient { index: k, value: a });
                    }
                }
                Ok(())
            }
            EnsembleSpec::Geronimus { base, t } => {
                if !(t.is_finite() && *t > 0.0 && *t < 1.0) {
                    return Err(bad(format!("geronimus weight t = {t} must lie in (0, 1)")));
                }
                base.validate()
            }
        }
    }

    /// Memoized coefficient sequence for this ensemble.
    pub fn sequence(&self) -> Result<VerblunskySequence> {
        self.validate()?;
        let label = self.to_string();
        Ok(match self {
            EnsembleSpec::Free => VerblunskySequence::free(),
            EnsembleSpec::Constant { a } => {
                let a = *a;
                VerblunskySequence::from_fn(label, move |_| a)
            }
            EnsembleSpec::PowerDecay { c, p } => {
                let (c, p) = (*c, *p);
                VerblunskySequence::from_fn(
                    label,
                    move |k| if k == 0 { c } else { c * (k as f64).powf(-p) },
                )
            }
            EnsembleSpec::PowerTail { c, p, start } => {
                let (c, p, start) = (*c, *p, *start);
                VerblunskySequence::from_fn(label, move |k| {
                    if k < start {
                        0.0
                    } else {
                        c * (k as f64).powf(-p)
                    }
                })
            }
            EnsembleSpec::Explicit(values) => VerblunskySequence::new(values.clone())?,
            EnsembleSpec::Geronimus { base, t } => {
                VerblunskySequence::from_stream(label, GeronimusStream::new(base.sequence()?, *t))
            }
        })
    }
}

/// The first `n` coefficients of `spec` as a finite sequence.
pub fn materialize(spec: &EnsembleSpec, n: usize) -> Result<VerblunskySequence> {
    if n == 0 {
        return Err(bad("materialize needs n >= 1"));
    }
    let seq = spec.sequence()?;
    VerblunskySequence::new(seq.prefix(n)?.to_vec())
}

/// Incremental point-mass update at `z = 1`.
///
/// With `r = t / (1 - t)`, `K_k = sum_{j<k} phi_j(1)^2` and
/// `u_k = phi_k(1)^2 / (r + K_k)`, the updated coefficient is
/// `alpha_k + (1 - alpha_k) u_k / (1 + u_k)`. On the circle at 1 the reversed
/// polynomial equals `phi_k` for real coefficients, so
/// `phi_{k+1}(1)^2 = phi_k(1)^2 (1 - alpha_k) / (1 + alpha_k)` and
/// `u_{k+1} = u_k (1 - alpha_k) / ((1 + alpha_k)(1 + u_k))`. Only the ratio is
/// carried, so nothing overflows.
struct GeronimusStream {
    base: VerblunskySequence,
    k: usize,
    u: f64,
}

impl GeronimusStream {
    fn new(base: VerblunskySequence, t: f64) -> Self {
        Self {
            base,
            k: 0,
            u: (1.0 - t) / t,
        }
    }
}

impl CoefficientStream for GeronimusStream {
    fn next_coefficient(&mut self) -> Result<f64> {
        // a finite base continues with zeros (its Bernstein-Szego measure)
        let a = match self.base.len_hint() {
            Some(len) if self.k >= len => 0.0,
            _ => self.base.get(self.k)?,
        };
        let q = self.u / (1.0 + self.u);
        let out = a + (1.0 - a) * q;
        self.u = q * (1.0 - a) / (1.0 + a);
        self.k += 1;
        Ok(out)
    }
}

/// Dot product accumulated in double-double.
fn dot2(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs
        .fold(TwoFloat::from(0.0), |s, (a, b)| s + TwoFloat::new_mul(a, b))
        .hi()
}

/// Relative size of `Im alpha` accepted as round-off.
const IMAG_TOLERANCE: f64 = 1e-9;

/// Verblunsky coefficients `alpha_0 .. alpha_{m-1}` from the moments
/// `c_k = integral conj(zeta)^k dmu`, `k = 0..m`, by the Levinson-type
/// recursion on monic polynomials.
pub fn verblunsky_from_moments(moments: &[Complex64]) -> Result<VerblunskySequence> {
    let Some(&c0) = moments.first() else {
        return Err(bad("need at least the moment c_0"));
    };
    if (c0 - 1.0).norm() > 1e-12 {
        return Err(bad(format!("moments must be normalized (c_0 = {c0})")));
    }
    let m = moments.len() - 1;
    let mut phi: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut energy = 1.0;
    let mut alphas = Vec::with_capacity(m);
    for n in 0..m {
        // conj(alpha_n) E_n = sum_j p_j conj(c_{j+1})
        let re = dot2(phi.iter().enumerate().flat_map(|(j, p)| {
            let c = moments[j + 1];
            [(p.re, c.re), (p.im, c.im)]
        }));
        let im = dot2(phi.iter().enumerate().flat_map(|(j, p)| {
            let c = moments[j + 1];
            [(p.im, c.re), (-p.re, c.im)]
        }));
        let alpha = Complex64::new(re, im).conj() / energy;
        if !(alpha.norm() < 1.0) {
            return Err(Error::NotPositiveDefinite { index: n });
        }
        if alpha.im.abs() > IMAG_TOLERANCE * (1.0 + alpha.re.abs()) {
            return Err(bad(format!(
                "moments give a non-real coefficient alpha_{n} = {alpha}"
            )));
        }
        // Phi_{n+1} = z Phi_n - conj(alpha) Phi_n*
        let deg = phi.len() - 1;
        let mut next = vec![Complex64::new(0.0, 0.0); deg + 2];
        for (j, &p) in phi.iter().enumerate() {
            next[j + 1] += p;
            next[deg - j] -= alpha.conj() * p.conj();
        }
        phi = next;
        energy *= 1.0 - alpha.norm_sqr();
        alphas.push(alpha.re);
    }
    VerblunskySequence::new(alphas)
}

/// Largest node count tried by [`bernstein_szego_moments`].
pub const MAX_MOMENT_NODES: usize = 1 << 24;

/// Agreement between successive grids that ends the doubling, just above
/// the summation round-off floor.
pub const MOMENT_TOLERANCE: f64 = 1e-13;

/// Moments `c_0 .. c_m` of the measure whose coefficients are
/// `alpha_0 .. alpha_{m-1}` followed by zeros (a shorter finite sequence is
/// padded with zeros):
/// `dmu = dtheta / (2 pi |phi_m(e^{i theta})|^2)`, integrated by the
/// trapezoidal rule. Starting from `points` nodes, the grid is doubled until
/// successive moments agree to [`MOMENT_TOLERANCE`]; densities with a pole
/// close to the circle need many nodes.
pub fn bernstein_szego_moments(
    alpha: &VerblunskySequence,
    m: usize,
    points: usize,
) -> Result<Vec<Complex64>> {
    if points < 2 * m + 2 {
        return Err(bad("too few quadrature nodes for the requested moments"));
    }
    let coeffs = alpha.prefix(alpha.len_hint().map_or(m, |len| len.min(m)))?;
    // raw sums over nodes j / total for j in `nodes`
    let node_sums = |total: usize, nodes: &mut dyn Iterator<Item = usize>| {
        let mut sums = vec![Complex64::new(0.0, 0.0); m + 1];
        for j in nodes {
            let theta = std::f64::consts::TAU * j as f64 / total as f64;
            let zeta = Complex64::from_polar(1.0, theta);
            let e = szego::evaluate_slice(&coeffs, zeta);
            let w = (-2.0 * e.log_scale).exp() / e.phi_star.norm_sqr();
            let step = zeta.conj();
            let mut pow = Complex64::new(1.0, 0.0);
            for s in sums.iter_mut() {
                *s += w * pow;
                pow *= step;
            }
        }
        sums
    };
    let normalize = |sums: &[Complex64]| -> Vec<Complex64> {
        let norm = sums[0].re;
        sums.iter().map(|s| s / norm).collect()
    };
    let mut total = points;
    let mut sums = node_sums(total, &mut (0..total));
    let mut moments = normalize(&sums);
    while total < MAX_MOMENT_NODES {
        let odd = node_sums(2 * total, &mut (0..total).map(|j| 2 * j + 1));
        sums.iter_mut().zip(&odd).for_each(|(s, o)| *s += o);
        total *= 2;
        let next = normalize(&sums);
        let change = next
            .iter()
            .zip(&moments)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        moments = next;
        if change <= MOMENT_TOLERANCE {
            return Ok(moments);
        }
    }
    Err(Error::Numerical(format!(
        "moment quadrature did not converge with {MAX_MOMENT_NODES} nodes"
    )))
}

/// Moments of `t nu + (1 - t) delta_1` from the moments of `nu`.
pub fn mix_with_point_mass(moments: &[Complex64], t: f64) -> Vec<Complex64> {
    moments.iter().map(|&c| t * c + (1.0 - t)).collect()
}

/// One row of a point-mass consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeronimusRow {
    pub k: usize,
    pub recursion: f64,
    pub moments: f64,
}

/// Compare the first `m` coefficients of `geronimus(base, t)` with the
/// moment recursion applied to the mixed moments. `base` must be
/// determined by its first `m` coefficients for the comparison to be exact,
/// which holds for any base: moments up to `c_m` depend on `alpha_0..alpha_{m-1}`.
pub fn geronimus_check(base: &EnsembleSpec, t: f64, m: usize) -> Result<Vec<GeronimusRow>> {
    let spec = EnsembleSpec::Geronimus {
        base: Box::new(base.clone()),
        t,
    };
    let updated = spec.sequence()?.prefix(m)?;
    let nu = base.sequence()?;
    let moments = bernstein_szego_moments(&nu, m, 1024.max(8 * m))?;
    let oracle = verblunsky_from_moments(&mix_with_point_mass(&moments, t))?.prefix(m)?;
    Ok((0..m)
        .map(|k| GeronimusRow {
            k,
            recursion: updated[k],
            moments: oracle[k],
        })
        .collect())
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Free => write!(f, "free"),
            EnsembleSpec::Constant { a } => write!(f, "constant:{a}"),
            EnsembleSpec::PowerDecay { c, p } => write!(f, "power_decay:{c}:{p}"),
            EnsembleSpec::PowerTail { c, p, start } => write!(f, "power_tail:{c}:{p}:{start}"),
            EnsembleSpec::Explicit(values) => {
                write!(f, "explicit:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            EnsembleSpec::Geronimus { base, t } => write!(f, "geronimus:{t}:{base}"),
        }
    }
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| bad(format!("cannot parse {what} from {s:?}")))
}

impl FromStr for EnsembleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let args: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(':').collect()
        };
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(bad(format!(
                    "ensemble {kind:?} takes {k} argument(s), got {:?}",
                    rest
                )))
            }
        };
        let spec = match kind {
            "free" => {
                arity(0)?;
                EnsembleSpec::Free
            }
            "constant" => {
                arity(1)?;
                EnsembleSpec::Constant {
                    a: num(args[0], "a")?,
                }
            }
            "power_decay" => {
                arity(2)?;
                EnsembleSpec::PowerDecay {
                    c: num(args[0], "c")?,
                    p: num(args[1], "p")?,
                }
            }
            "power_tail" => {
                arity(3)?;
                EnsembleSpec::PowerTail {
                    c: num(args[0], "c")?,
                    p: num(args[1], "p")?,
                    start: args[2]
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("cannot parse start index from {:?}", args[2])))?,
                }
            }
            "explicit" => {
                let values = if rest.trim().is_empty() {
                    Vec::new()
                } else {
                    rest.split(',')
                        .map(|v| num(v, "coefficient"))
                        .collect::<Result<_>>()?
                };
                EnsembleSpec::Explicit(values)
            }
            "geronimus" => {
                let (t, base) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("geronimus syntax is geronimus:<t>:<base>"))?;
                EnsembleSpec::Geronimus {
                    base: Box::new(base.parse()?),
                    t: num(t, "t")?,
                }
            }
            other => return Err(bad(format!("unknown ensemble {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<EnsembleSpec> for String {
    fn from(spec: EnsembleSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for EnsembleSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in [
            "free",
            "constant:0.5",
            "power_decay:0.3:2",
            "power_tail:1:2:2",
            "explicit:0.1,-0.2,0.3",
            "geronimus:0.25:power_decay:0.3:2",
            "geronimus:0.5:geronimus:0.5:free",
        ] {
            let spec: EnsembleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        for s in [
            "",
            "kac",
            "constant:1",
            "power_decay:0.3:-1",
            "power_decay:2:1",
            "power_tail:1:2:1",
            "geronimus:1.5:free",
            "free:3",
        ] {
            assert!(s.parse::<EnsembleSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn generators() {
        let s = materialize(&EnsembleSpec::Free, 5).unwrap();
        assert_eq!(&*s.prefix(5).unwrap(), &[0.0; 5]);
        let s = EnsembleSpec::PowerDecay { c: 0.3, p: 2.0 }
            .sequence()
            .unwrap();
        assert_eq!(&*s.prefix(3).unwrap(), &[0.3, 0.3, 0.075]);
        let s = EnsembleSpec::PowerTail {
            c: 1.0,
            p: 2.0,
            start: 2,
        }
        .sequence()
        .unwrap();
        assert_eq!(&*s.prefix(4).unwrap(), &[0.0, 0.0, 0.25, 1.0 / 9.0]);
    }

    #[test]
    fn geronimus_over_free() {
        let spec: EnsembleSpec = "geronimus:0.5:free".parse().unwrap();
        let s = spec.sequence().unwrap();
        assert_eq!(&*s.prefix(3).unwrap(), &[0.5, 1.0 / 3.0, 0.25]);
        for n in [10, 100, 1000] {
            assert!((s.get(n - 1).unwrap() - 1.0 / (n as f64 + 1.0)).abs() < 1e-15);
        }
        let t = 0.2;
        let s = EnsembleSpec::Geronimus {
            base: Box::new(EnsembleSpec::Free),
            t,
        }
        .sequence()
        .unwrap();
        for n in 1..20 {
            let expected = (1.0 - t) / (t + n as f64 * (1.0 - t));
            assert!((s.get(n - 1).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn moments_of_arclength() {
        let mut m = vec![Complex64::new(0.0, 0.0); 9];
        m[0] = Complex64::new(1.0, 0.0);
        let s = verblunsky_from_moments(&m).unwrap();
        assert!(s.prefix(8).unwrap().iter().all(|&a| a == 0.0));
        let mixed = mix_with_point_mass(&m, 0.5);
        let s = verblunsky_from_moments(&mixed).unwrap();
        for (k, &a) in s.prefix(8).unwrap().iter().enumerate() {
            assert!((a - 1.0 / (k as f64 + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn moments_of_single_coefficient() {
        // alpha = [a]: c_k = a^|k|
        let a: f64 = 0.5;
        let m: Vec<Complex64> = (0..6).map(|k| Complex64::new(a.powi(k), 0.0)).collect();
        let s = verblunsky_from_moments(&m).unwrap();
        let got = s.prefix(5).unwrap();
        assert!((got[0] - 0.5).abs() < 1e-15);
        assert!(got[1..].iter().all(|x| x.abs() < 1e-15));
        let q =
            bernstein_szego_moments(&VerblunskySequence::new(vec![a]).unwrap(), 5, 256).unwrap();
        for (k, c) in q.iter().enumerate() {
            assert!((c - a.powi(k as i32)).norm() < 1e-14);
        }
    }

    #[test]
    fn non_positive_moments_rejected() {
        let m = [Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)];
        assert!(matches!(
            verblunsky_from_moments(&m),
            Err(Error::NotPositiveDefinite { index: 0 })
        ));
        assert!(verblunsky_from_moments(&[Complex64::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn point_mass_update_matches_moments() {
        for base in [
            EnsembleSpec::Free,
            EnsembleSpec::PowerDecay { c: 0.3, p: 2.0 },
        ] {
            for t in [0.25, 0.5, 0.9] {
                for row in geronimus_check(&base, t, 12).unwrap() {
                    assert!(
                        (row.recursion - row.moments).abs() < 1e-8,
                        "{base} {t} {row:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn serde_uses_text_syntax() {
        let spec: EnsembleSpec = "geronimus:0.25:power_decay:0.3:2".parse().unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, "\"geronimus:0.25:power_decay:0.3:2\"");
        let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
