//! Monte Carlo sampling of `P_n = sum_{i<n} eta_i phi_i` with i.i.d.
//! standard Gaussian `eta_i`, and zero counting.
//!
//! RNG contract: trial `k` of a batch with seed `s` draws from
//! `ChaCha20Rng::seed_from_u64(s)` switched to stream `k`. Normals come from
//! the Marsaglia polar method, consuming uniforms in pairs. Trials are thus
//! independent of scheduling, and serial and parallel runs agree bit for bit.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::expectation::Region;
use crate::roots::polynomial_roots;
use crate::szego::orthonormal_coefficients;

/// A root counts as real when `|Im| <= REAL_TOLERANCE (1 + |root|)`.
pub const REAL_TOLERANCE: f64 = 1e-8;

/// Resampling attempts per trial when the leading coefficient vanishes.
const MAX_RESAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// Number of basis functions; polynomials have degree `n - 1`.
    pub n: usize,
    pub ensemble: EnsembleSpec,
    pub seed: u64,
    pub trials: usize,
}

/// Roots of every trial, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRoots {
    pub n: usize,
    pub seed: u64,
    pub roots: Vec<Vec<Complex64>>,
    /// Trials where the leading coefficient underflowed and was redrawn.
    pub resampled: usize,
}

/// Standard normal pair by the Marsaglia polar method.
pub fn polar_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Fill `out` with standard normals.
pub fn fill_normals<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = polar_normal_pair(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = polar_normal_pair(rng).0;
    }
}

/// The RNG for one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

impl SampleBatch {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(
                "Monte Carlo needs n >= 2 (degree >= 1)".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter(
                "Monte Carlo needs trials >= 1".into(),
            ));
        }
        self.ensemble.validate()
    }
}

/// Snap numerically real roots onto the axis.
pub fn classify_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= REAL_TOLERANCE * (1.0 + z.norm()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Draw every trial and extract all `n - 1` roots.
pub fn sample_roots(batch: &SampleBatch) -> Result<SampledRoots> {
    batch.validate()?;
    let n = batch.n;
    let alpha = batch.ensemble.sequence()?;
    let basis = orthonormal_coefficients(&alpha, n)?;
    let results: Vec<Result<(Vec<Complex64>, bool)>> = (0..batch.trials)
        .into_par_iter()
        .map(|trial| one_trial(&basis, batch.seed, trial))
        .collect();
    let mut roots = Vec::with_capacity(batch.trials);
    let mut resampled = 0;
    for r in results {
        let (z, redrawn) = r?;
        resampled += usize::from(redrawn);
        roots.push(z);
    }
    Ok(SampledRoots {
        n,
        seed: batch.seed,
        roots,
        resampled,
    })
}

fn one_trial(basis: &[Vec<f64>], seed: u64, trial: usize) -> Result<(Vec<Complex64>, bool)> {
    let n = basis.len();
    let mut rng = trial_rng(seed, trial);
    let mut eta = vec![0.0; n];
    let mut coeffs = vec![0.0; n];
    for attempt in 0..MAX_RESAMPLES {
        fill_normals(&mut rng, &mut eta);
        coeffs.iter_mut().for_each(|c| *c = 0.0);
        for (e, row) in eta.iter().zip(basis) {
            for (c, r) in coeffs.iter_mut().zip(row) {
                *c += e * r;
            }
        }
        let lead = coeffs[n - 1];
        let size = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if lead.abs() <= f64::EPSILON * size {
            continue;
        }
        let roots: Vec<Complex64> = polynomial_roots(&coeffs)?
            .into_iter()
            .map(classify_real)
            .collect();
        if roots.len() != n - 1 {
            return Err(Error::Numerical(format!(
                "trial {trial}: found {} roots for degree {}",
                roots.len(),
                n - 1
            )));
        }
        return Ok((roots, attempt > 0));
    }
    Err(Error::Numerical(format!(
        "trial {trial}: leading coefficient vanished {MAX_RESAMPLES} times"
    )))
}

/// Per-region empirical counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCountReport {
    pub region: Region,
    pub mean_count: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Histogram of the number of roots found per trial.
    pub per_trial_total: BTreeMap<usize, usize>,
    /// Histogram of per-trial counts inside the region.
    pub count_histogram: BTreeMap<usize, usize>,
    pub seed: Option<u64>,
}

fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = values.clone().count();
    let mean = values.clone().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, f64::NAN);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

/// Count roots of each trial inside `region`.
pub fn count_in_region(sample: &SampledRoots, region: &Region) -> Result<ZeroCountReport> {
    region.validate()?;
    if sample.roots.is_empty() {
        return Err(Error::InvalidParameter("no trials to count".into()));
    }
    let counts: Vec<usize> = sample
        .roots
        .iter()
        .map(|r| r.iter().filter(|&&z| region.contains(z)).count())
        .collect();
    let (mean_count, std_error) = mean_and_std_error(counts.iter().map(|&c| c as f64));
    let mut per_trial_total = BTreeMap::new();
    for r in &sample.roots {
        *per_trial_total.entry(r.len()).or_insert(0) += 1;
    }
    let mut count_histogram = BTreeMap::new();
    for &c in &counts {
        *count_histogram.entry(c).or_insert(0) += 1;
    }
    Ok(ZeroCountReport {
        region: *region,
        mean_count,
        std_error,
        trials: counts.len(),
        per_trial_total,
        count_histogram,
        seed: Some(sample.seed),
    })
}

/// Mean and standard error of `|N(region) / n - |S| / 2 pi|` over trials,
/// for an annular sector.
pub fn annular_discrepancy(sample: &SampledRoots, region: &Region) -> Result<(f64, f64)> {
    let Region::AnnularSector { theta1, theta2, .. } = *region else {
        return Err(Error::InvalidParameter(
            "discrepancy is defined for annular sectors".into(),
        ));
    };
    region.validate()?;
    let frac = (theta2 - theta1) / std::f64::consts::TAU;
    let n = sample.n as f64;
    let d: Vec<f64> = sample
        .roots
        .iter()
        .map(|r| (r.iter().filter(|&&z| region.contains(z)).count() as f64 / n - frac).abs())
        .collect();
    Ok(mean_and_std_error(d.iter().copied()))
}

/// Counts of roots with `|r - 1| < width` in `bins` equal angular bins
/// starting at angle 0.
pub fn angular_histogram(sample: &SampledRoots, bins: usize, width: f64) -> Vec<usize> {
    let mut h = vec![0; bins];
    for z in sample.roots.iter().flatten() {
        if (z.norm() - 1.0).abs() < width {
            let t = z.arg().rem_euclid(std::f64::consts::TAU);
            let k = ((t / std::f64::consts::TAU) * bins as f64) as usize;
            h[k.min(bins - 1)] += 1;
        }
    }
    h
}

/// Pearson statistic of observed counts against expected counts.
pub fn chi_square(observed: &[usize], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(n: usize, ensemble: &str, seed: u64, trials: usize) -> SampleBatch {
        SampleBatch {
            n,
            ensemble: ensemble.parse().unwrap(),
            seed,
            trials,
        }
    }

    #[test]
    fn linear_case_root_is_exact() {
        let b = batch(2, "free", 7, 50);
        let s = sample_roots(&b).unwrap();
        for (trial, r) in s.roots.iter().enumerate() {
            let mut rng = trial_rng(7, trial);
            let mut eta = [0.0; 2];
            fill_normals(&mut rng, &mut eta);
            assert_eq!(r.len(), 1);
            assert_eq!(r[0].im, 0.0);
            assert!((r[0].re + eta[0] / eta[1]).abs() <= 1e-15 * r[0].re.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic_and_conjugate_closed() {
        let b = batch(12, "power_decay:0.3:2", 11, 20);
        let a = sample_roots(&b).unwrap();
        let c = sample_roots(&b).unwrap();
        assert_eq!(a, c);
        for r in &a.roots {
            assert_eq!(r.len(), 11);
            for z in r {
                assert!(r
                    .iter()
                    .any(|w| (w - z.conj()).norm() <= 1e-12 * (1.0 + z.norm())));
            }
        }
        let other = sample_roots(&batch(12, "power_decay:0.3:2", 12, 20)).unwrap();
        assert_ne!(a.roots, other.roots);
    }

    #[test]
    fn polar_normals_have_unit_variance() {
        let mut rng = trial_rng(3, 0);
        let mut x = vec![0.0; 100_001];
        fill_normals(&mut rng, &mut x);
        let (mean, se) = mean_and_std_error(x.iter().copied());
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 4.0 * se);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn whole_plane_count_is_degree() {
        let s = sample_roots(&batch(9, "constant:0.4", 5, 30)).unwrap();
        let r = count_in_region(&s, &Region::WholePlane).unwrap();
        assert_eq!(r.mean_count, 8.0);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.per_trial_total.len(), 1);
        assert_eq!(r.per_trial_total[&8], 30);
    }

    #[test]
    fn rejects_bad_batches() {
        assert!(sample_roots(&batch(1, "free", 0, 3)).is_err());
        assert!(sample_roots(&batch(4, "free", 0, 0)).is_err());
    }
}
