//! Christoffel–Darboux kernels `K_n`, `K_n^(1,0)`, `K_n^(1,1)` and the
//! Christoffel function.
//!
//! Two independent evaluations are provided: a direct sum over the
//! orthonormal basis ([`kernel_direct`]) and the closed Christoffel–Darboux
//! form built from degree-`n` values only ([`kernel_cd`]). The closed form is
//! a 0/0 quotient on `z conj(w) = 1`, so it refuses near-diagonal input.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::szego::{self, pow2, Sweep, SzegoEval, VerblunskySequence};

/// `(K_n, K_n^(1,0), K_n^(1,1))` at `(z, w)`, stored with a shared scale:
/// true values are the stored ones times `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTriple {
    pub k: Complex64,
    pub k10: Complex64,
    pub k11: Complex64,
    pub log_scale: f64,
}

impl KernelTriple {
    pub fn unscaled(&self) -> [Complex64; 3] {
        let s = self.log_scale.exp();
        [self.k * s, self.k10 * s, self.k11 * s]
    }
}

/// The kernel quantities entering the intensity formulas at `z`.
///
/// All entries share `log_scale`. For real-coefficient polynomials
/// `phi_i(conj z) = conj(phi_i(z))`, so a single recurrence sweep at `z`
/// produces every entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBundle {
    pub n: usize,
    pub z: Complex64,
    /// `K_n(z, z)`
    pub k_zz: f64,
    /// `K_n(z, conj z)`
    pub k_zzbar: Complex64,
    /// `K_n^(1,0)(z, z)`
    pub k10_zz: Complex64,
    /// `K_n^(1,0)(z, conj z)`
    pub k10_zzbar: Complex64,
    /// `K_n^(1,0)(conj z, z)`
    pub k10_zbarz: Complex64,
    /// `K_n^(1,1)(z, z)`
    pub k11_zz: f64,
    pub log_scale: f64,
}

fn check_terms(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("kernels need n >= 1 terms".into()))
    } else {
        Ok(())
    }
}

/// Direct sums over `i = 0 .. n-1` of `phi_i(z) conj(phi_i(w))` and the
/// derivative analogues, using one recurrence sweep per point.
pub fn kernel_direct(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
    w: Complex64,
) -> Result<KernelTriple> {
    check_terms(n)?;
    szego::check_point(z)?;
    szego::check_point(w)?;
    let coeffs = alpha.prefix(n - 1)?;
    Ok(direct_slice(&coeffs, z, w))
}

pub(crate) fn direct_slice(alpha: &[f64], z: Complex64, w: Complex64) -> KernelTriple {
    let mut sz = Sweep::new(z);
    let mut sw = Sweep::new(w);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k, mut k10, mut k11) = (zero, zero, zero);
    for i in 0..=alpha.len() {
        let pw = sw.phi.conj();
        let dpw = sw.dphi.conj();
        k += sz.phi * pw;
        k10 += sz.dphi * pw;
        k11 += sz.dphi * dpw;
        if i < alpha.len() {
            let shift = sz.step(alpha[i]) + sw.step(alpha[i]);
            if shift != 0 {
                let f = pow2(-shift);
                k *= f;
                k10 *= f;
                k11 *= f;
            }
        }
    }
    KernelTriple {
        k,
        k10,
        k11,
        log_scale: f64::from(sz.exp2 + sw.exp2) * std::f64::consts::LN_2,
    }
}

/// Relative cutoff on `|1 - z conj(w)|` below which [`kernel_cd`] refuses.
pub const CD_CUTOFF: f64 = 1e-4;

/// Christoffel–Darboux closed form from degree-`n` values at `z` and
/// `conj(w)`.
pub fn kernel_cd(
    alpha: &VerblunskySequence,
    n: usize,
    z: Complex64,
    w: Complex64,
) -> Result<KernelTriple> {
    check_terms(n)?;
    let gap = (1.0 - z * w.conj()).norm();
    if gap < CD_CUTOFF * (1.0 + z.norm() * w.norm()) {
        return Err(Error::NearDiagonal { gap });
    }
    let ez = szego::evaluate(alpha, n, z)?;
    let eu = szego::evaluate(alpha, n, w.conj())?;
    Ok(cd_from_evals(&ez, &eu))
}

fn cd_from_evals(ez: &SzegoEval, eu: &SzegoEval) -> KernelTriple {
    let (z, u) = (ez.z, eu.z);
    let d = 1.0 - z * u;
    let num = ez.phi_star * eu.phi_star - ez.phi * eu.phi;
    let num_z = ez.dphi_star * eu.phi_star - ez.dphi * eu.phi;
    let num_u = ez.phi_star * eu.dphi_star - ez.phi * eu.dphi;
    let num_zu = ez.dphi_star * eu.dphi_star - ez.dphi * eu.dphi;
    let k = num / d;
    let k10 = num_z / d + u * num / (d * d);
    let k11 = num_zu / d + (z * num_z + u * num_u) / (d * d) + (1.0 + z * u) * num / (d * d * d);
    KernelTriple {
        k,
        k10,
        k11,
        log_scale: ez.log_scale + eu.log_scale,
    }
}

/// Christoffel function `lambda_n(z) = 1 / K_n(z, z)`.
pub fn christoffel(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<f64> {
    let t = kernel_direct(alpha, n, z, z)?;
    Ok((-t.log_scale).exp() / t.k.re)
}

/// All six kernel entries at `z` from one sweep over `n - 1` coefficients.
pub fn kernel_bundle(alpha: &VerblunskySequence, n: usize, z: Complex64) -> Result<KernelBundle> {
    check_terms(n)?;
    szego::check_point(z)?;
    let coeffs = alpha.prefix(n - 1)?;
    Ok(bundle_slice(&coeffs, n, z, false).0)
}

/// Bundle plus the degree-`n` values at `z` in the same scale
/// (`edge.log_scale * 2 == bundle.log_scale`). Needs `n` coefficients when
/// `with_edge` is set, `n - 1` otherwise.
pub(crate) fn bundle_slice(
    alpha: &[f64],
    n: usize,
    z: Complex64,
    with_edge: bool,
) -> (KernelBundle, Option<SzegoEval>) {
    let mut s = Sweep::new(z);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k, mut kb, mut k10, mut k10b, mut k11) = (0.0, zero, zero, zero, 0.0);
    let steps = if with_edge { n } else { n - 1 };
    for i in 0..=steps {
        if i < n {
            k += s.phi.norm_sqr();
            kb += s.phi * s.phi;
            k10 += s.dphi * s.phi.conj();
            k10b += s.dphi * s.phi;
            k11 += s.dphi.norm_sqr();
        }
        if i < steps {
            let shift = s.step(alpha[i]);
            if shift != 0 {
                let f = pow2(-2 * shift);
                k *= f;
                kb *= f;
                k10 *= f;
                k10b *= f;
                k11 *= f;
            }
        }
    }
    // Bring the largest entry near 1 so products of three entries stay finite.
    let max = k.max(kb.norm()).max(k10.norm()).max(k10b.norm()).max(k11);
    let half = if max > 0.0 {
        max.log2().floor() as i32 / 2
    } else {
        0
    };
    let f = pow2(-2 * half);
    s.exp2 += half;
    let bundle = KernelBundle {
        n,
        z,
        k_zz: k * f,
        k_zzbar: kb * f,
        k10_zz: k10 * f,
        k10_zzbar: k10b * f,
        k10_zbarz: (k10b * f).conj(),
        k11_zz: k11 * f,
        log_scale: 2.0 * f64::from(s.exp2) * std::f64::consts::LN_2,
    };
    let edge = with_edge.then(|| {
        let g = pow2(-half);
        s.phi *= g;
        s.phi_star *= g;
        s.dphi *= g;
        s.dphi_star *= g;
        SzegoEval::from_sweep(&s, szego::kappa_log_of(&alpha[..n]))
    });
    (bundle, edge)
}
