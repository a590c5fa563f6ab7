//! Command implementations. Each returns the rendered artifact.

use std::collections::BTreeMap;

use opuc_zeros::ensembles::{geronimus_check, GeronimusRow};
use opuc_zeros::expectation::{
    conservation_check, expected_complex_zeros, expected_real_zeros, expected_zeros,
    ConservationReport, Region,
};
use opuc_zeros::intensity::{
    h_log_derivative, real_intensity_closed, real_intensity_kernel, scaling_limit_density,
};
use opuc_zeros::montecarlo::{count_in_region, sample_roots, SampleBatch};
use opuc_zeros::para::para_spectrum;
use opuc_zeros::quadrature::Tolerance;
use opuc_zeros::{Error, VerblunskySequence};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::output::{csv, json, Cell, Header};
use crate::CliError;

/// Largest `|E N(C) - (n - 1)|` reported as conserved.
pub const CONSERVATION_TOLERANCE: f64 = 1e-2;

pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let header = Header::new(config);
    let alpha = config.ensemble.sequence()?;
    let tol = Tolerance::new(config.tol, config.tol);
    match config.command {
        Command::Intensity => intensity(config, &header, &alpha),
        Command::ExpectedZeros => expected(config, &header, &alpha, tol),
        Command::ParaSpectrum => spectrum(config, &header, &alpha),
        Command::Mc => monte_carlo(config, &header, &alpha, tol),
        Command::ScalingLimit => scaling(config, &header, &alpha, tol),
        Command::GeronimusCheck => geronimus(config, &header),
        Command::ConservationCheck => conservation(config, &header, &alpha, tol),
    }
}

/// Prefix an `n` column when several degrees share one table.
fn table(config: &RunConfig, columns: &[&'static str]) -> Vec<&'static str> {
    let mut c = Vec::with_capacity(columns.len() + 1);
    if config.n.len() > 1 {
        c.push("n");
    }
    c.extend_from_slice(columns);
    c
}

fn row(config: &RunConfig, n: usize, cells: impl IntoIterator<Item = Cell>) -> Vec<Cell> {
    let mut r = Vec::new();
    if config.n.len() > 1 {
        r.push(Cell::from(n));
    }
    r.extend(cells);
    r
}

fn intensity(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
) -> Result<String, CliError> {
    let grid = config.real_grid.expect("validated").points();
    let mut rows = Vec::new();
    for &n in &config.n {
        let values = grid
            .par_iter()
            .map(|&x| {
                let kernel = real_intensity_kernel(alpha, n, x)?.rho;
                let closed = match real_intensity_closed(alpha, n, x) {
                    Ok(v) => v.rho,
                    Err(Error::OutOfDomain { .. }) => f64::NAN,
                    Err(e) => return Err(e),
                };
                Ok((x, kernel, closed))
            })
            .collect::<opuc_zeros::Result<Vec<_>>>()?;
        rows.extend(
            values
                .into_iter()
                .map(|(x, k, c)| row(config, n, [x.into(), k.into(), c.into()])),
        );
    }
    Ok(csv(
        header,
        &table(config, &["x", "rho_kernel", "rho_closed"]),
        &rows,
    ))
}

#[derive(Serialize)]
struct ExpectedRow {
    n: usize,
    region: Region,
    value: f64,
    error: f64,
    evaluations: usize,
    /// Planar regions: the non-real and real parts of `value`.
    #[serde(skip_serializing_if = "Option::is_none")]
    complex: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    real: Option<f64>,
}

fn expected(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
    tol: Tolerance,
) -> Result<String, CliError> {
    let region = config.region.unwrap_or(Region::WholeRealLine);
    let mut rows = Vec::new();
    for &n in &config.n {
        rows.push(if region.is_real() {
            let e = expected_real_zeros(alpha, n, &region, tol)?;
            ExpectedRow {
                n,
                region,
                value: e.value,
                error: e.error,
                evaluations: e.evaluations,
                complex: None,
                real: None,
            }
        } else {
            let e = expected_complex_zeros(alpha, n, &region, tol)?;
            ExpectedRow {
                n,
                region,
                value: e.total,
                error: e.complex.error + e.real.error,
                evaluations: e.complex.evaluations + e.real.evaluations,
                complex: Some(e.complex.value),
                real: Some(e.real.value),
            }
        });
    }
    Ok(json(header, &rows))
}

fn spectrum(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &n in &config.n {
        let s = para_spectrum(alpha, n)?;
        for (k, (z, w)) in s.zeros.iter().zip(&s.weights).enumerate() {
            rows.push(row(
                config,
                n,
                [
                    k.into(),
                    z.arg().into(),
                    z.re.into(),
                    z.im.into(),
                    (*w).into(),
                ],
            ));
        }
    }
    Ok(csv(
        header,
        &table(config, &["k", "theta", "re", "im", "weight"]),
        &rows,
    ))
}

#[derive(Serialize)]
struct McRow {
    n: usize,
    region: Region,
    trials: usize,
    mean_count: f64,
    std_error: f64,
    /// Quadrature prediction for the same region.
    expected: f64,
    z_score: f64,
    resampled: usize,
    per_trial_total: BTreeMap<usize, usize>,
    count_histogram: BTreeMap<usize, usize>,
}

fn monte_carlo(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
    tol: Tolerance,
) -> Result<String, CliError> {
    let region = config.region.unwrap_or(Region::WholeRealLine);
    let mut rows = Vec::new();
    for &n in &config.n {
        let sample = sample_roots(&SampleBatch {
            n,
            ensemble: config.ensemble.clone(),
            seed: config.seed,
            trials: config.trials,
        })?;
        let report = count_in_region(&sample, &region)?;
        let expected = expected_zeros(alpha, n, &region, tol)?.value;
        rows.push(McRow {
            n,
            region,
            trials: report.trials,
            mean_count: report.mean_count,
            std_error: report.std_error,
            expected,
            z_score: (report.mean_count - expected) / report.std_error,
            resampled: sample.resampled,
            per_trial_total: report.per_trial_total,
            count_histogram: report.count_histogram,
        });
    }
    Ok(json(header, &rows))
}

#[derive(Serialize)]
struct WindowRow {
    n: usize,
    region: Region,
    expected: f64,
    error: f64,
    per_n: f64,
    prediction: f64,
    prediction_per_n: f64,
    ratio: f64,
}

fn scaling(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
    tol: Tolerance,
) -> Result<String, CliError> {
    if let Some(grid) = config.tau_grid {
        let rows: Vec<Vec<Cell>> = grid
            .points()
            .into_iter()
            .map(|tau| {
                vec![
                    tau.into(),
                    scaling_limit_density(tau).into(),
                    h_log_derivative(tau).into(),
                ]
            })
            .collect();
        return Ok(csv(header, &["tau", "density", "h_log_derivative"], &rows));
    }
    let Some(Region::ScalingWindow {
        theta1,
        theta2,
        tau1,
        tau2,
        ..
    }) = config.region
    else {
        unreachable!("validated");
    };
    let mut rows = Vec::new();
    for &n in &config.n {
        let region = Region::ScalingWindow {
            theta1,
            theta2,
            tau1,
            tau2,
            n,
        };
        let e = expected_complex_zeros(alpha, n, &region, tol)?;
        let prediction = e.prediction.expect("windows carry a prediction");
        rows.push(WindowRow {
            n,
            region,
            expected: e.total,
            error: e.complex.error + e.real.error,
            per_n: e.total / n as f64,
            prediction,
            prediction_per_n: prediction / n as f64,
            ratio: e.total / prediction,
        });
    }
    Ok(json(header, &rows))
}

fn geronimus(config: &RunConfig, header: &Header) -> Result<String, CliError> {
    let t = config.t.expect("validated");
    let rows: Vec<Vec<Cell>> = geronimus_check(&config.ensemble, t, config.terms)?
        .into_iter()
        .map(
            |GeronimusRow {
                 k,
                 recursion,
                 moments,
             }| {
                vec![
                    k.into(),
                    recursion.into(),
                    moments.into(),
                    (recursion - moments).abs().into(),
                ]
            },
        )
        .collect();
    Ok(csv(
        header,
        &["k", "recursion", "moments", "abs_diff"],
        &rows,
    ))
}

#[derive(Serialize)]
struct ConservationRow {
    #[serde(flatten)]
    report: ConservationReport,
    conserved: bool,
}

fn conservation(
    config: &RunConfig,
    header: &Header,
    alpha: &VerblunskySequence,
    tol: Tolerance,
) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &n in &config.n {
        let report = conservation_check(alpha, n, tol)?;
        rows.push(ConservationRow {
            conserved: report.discrepancy.abs() <= CONSERVATION_TOLERANCE,
            report,
        });
    }
    Ok(json(header, &rows))
}
