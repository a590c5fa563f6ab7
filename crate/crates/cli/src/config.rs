//! Run configuration: command-line flags layered over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use opuc_zeros::ensembles::EnsembleSpec;
use opuc_zeros::expectation::Region;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Real intensity on a grid by the kernel and closed forms (CSV).
    Intensity,
    /// Expected number of zeros in a region (JSON).
    ExpectedZeros,
    /// Paraorthogonal zeros and weights (CSV).
    ParaSpectrum,
    /// Monte Carlo zero counts against quadrature (JSON).
    Mc,
    /// Near-circle window counts against the scaling limit (JSON), or the
    /// limit density on a tau grid (CSV). Each `--n` replaces the window's
    /// own degree, which is the default.
    ScalingLimit,
    /// Point-mass update against the moment oracle (CSV).
    GeronimusCheck,
    /// Real plus complex expected counts against the degree (JSON).
    ConservationCheck,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Inclusive grid `start:end:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.end
                } else {
                    self.start + k as f64 * step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("grid `{s}` must be start:end:count"));
        };
        let num = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("grid `{s}`: `{t}` is not a finite number"))
        };
        let (start, end) = (num(a)?, num(b)?);
        let count: usize = c
            .parse()
            .map_err(|_| format!("grid `{s}`: count `{c}` is not a positive integer"))?;
        if count == 0 || start > end || (count == 1 && start != end) {
            return Err(format!(
                "grid `{s}` needs start <= end and count >= 2 (or count 1 with start = end)"
            ));
        }
        Ok(Grid { start, end, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.start, self.end, self.count)
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// One or more values of `n`, written `64` or `8,16,32`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    One(usize),
    Many(Vec<usize>),
}

impl Degrees {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Degrees::One(n) => vec![*n],
            Degrees::Many(v) => v.clone(),
        }
    }
}

impl FromStr for Degrees {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("`{t}` is not a non-negative integer"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if v.len() == 1 {
            Degrees::One(v[0])
        } else {
            Degrees::Many(v)
        })
    }
}

/// Settings shared by all commands. Every field is optional here so that
/// flags can override a config file field by field.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Ensemble, e.g. `free`, `constant:0.5`, `power_decay:0.3:2`,
    /// `power_tail:1:2:2`, `explicit:0.1,-0.2`, `geronimus:0.5:free`.
    #[arg(long)]
    pub ensemble: Option<EnsembleSpec>,

    /// Number of basis functions (polynomial degree n - 1); a comma list runs several.
    #[arg(long)]
    pub n: Option<Degrees>,

    /// Real grid `start:end:count`, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub real_grid: Option<Grid>,

    /// Tau grid `start:end:count` for the scaling-limit curve.
    #[arg(long, allow_hyphen_values = true)]
    pub tau_grid: Option<Grid>,

    /// Region: `real:a:b`, `real_line`, `annulus:theta1:theta2:delta`,
    /// `window:theta1:theta2:tau1:tau2:n` or `plane`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<Region>,

    /// Point-mass weight `t` of the base measure, in (0, 1).
    #[arg(long)]
    pub t: Option<f64>,

    /// Number of coefficients compared by geronimus-check.
    #[arg(long)]
    pub terms: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub trials: Option<usize>,

    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Settings {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            ensemble: self.ensemble.or(base.ensemble),
            n: self.n.or(base.n),
            real_grid: self.real_grid.or(base.real_grid),
            tau_grid: self.tau_grid.or(base.tau_grid),
            region: self.region.or(base.region),
            t: self.t.or(base.t),
            terms: self.terms.or(base.terms),
            seed: self.seed.or(base.seed),
            trials: self.trials.or(base.trials),
            tol: self.tol.or(base.tol),
            output: self.output.or(base.output),
        }
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TERMS: usize = 12;

/// A fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub ensemble: EnsembleSpec,
    pub n: Vec<usize>,
    pub real_grid: Option<Grid>,
    pub tau_grid: Option<Grid>,
    pub region: Option<Region>,
    pub t: Option<f64>,
    pub terms: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl RunConfig {
    pub fn resolve(command: Command, s: Settings) -> Result<RunConfig, CliError> {
        let ensemble = s.ensemble.unwrap_or(EnsembleSpec::Free);
        ensemble.validate()?;
        let needs_no_n = command == Command::GeronimusCheck
            || (command == Command::ScalingLimit && s.tau_grid.is_some());
        let n = match (s.n, s.region) {
            (Some(d), _) => d.to_vec(),
            (None, _) if needs_no_n => Vec::new(),
            (None, Some(Region::ScalingWindow { n, .. })) if command == Command::ScalingLimit => {
                vec![n]
            }
            (None, _) => return Err(input("--n is required")),
        };
        if (n.is_empty() && !needs_no_n) || n.contains(&0) {
            return Err(input("--n values must be positive"));
        }
        let tol = s.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(input(format!("--tol {tol} must be positive")));
        }
        let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(input("--trials must be positive"));
        }
        if let Some(r) = &s.region {
            r.validate()?;
        }
        if let Some(t) = s.t {
            if !(t > 0.0 && t < 1.0) {
                return Err(input(format!("--t {t} must lie in (0, 1)")));
            }
        }
        let terms = s.terms.unwrap_or(DEFAULT_TERMS);
        match command {
            Command::Intensity if s.real_grid.is_none() => {
                return Err(input("intensity needs --real-grid"));
            }
            Command::GeronimusCheck if s.t.is_none() => {
                return Err(input("geronimus-check needs --t"));
            }
            Command::GeronimusCheck if terms == 0 => {
                return Err(input("--terms must be positive"));
            }
            Command::ScalingLimit
                if s.tau_grid.is_none()
                    && !matches!(s.region, Some(Region::ScalingWindow { .. })) =>
            {
                return Err(input("scaling-limit needs --tau-grid or a window region"));
            }
            Command::Mc | Command::ExpectedZeros | Command::ConservationCheck
                if n.iter().any(|&k| k < 2) =>
            {
                return Err(input("zero counts need n >= 2"));
            }
            _ => {}
        }
        Ok(RunConfig {
            command,
            ensemble,
            n,
            real_grid: s.real_grid,
            tau_grid: s.tau_grid,
            region: s.region,
            t: s.t,
            terms,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            trials,
            tol,
            output: s.output,
        })
    }

    /// Command line that reproduces this run, minus the output path.
    pub fn command_line(&self) -> String {
        let n: Vec<String> = self.n.iter().map(|k| k.to_string()).collect();
        let mut parts = vec![
            "opuc".to_string(),
            self.command.to_string(),
            format!("--ensemble={}", self.ensemble),
        ];
        if !n.is_empty() {
            parts.push(format!("--n={}", n.join(",")));
        }
        if let Some(g) = self.real_grid {
            parts.push(format!("--real-grid={g}"));
        }
        if let Some(g) = self.tau_grid {
            parts.push(format!("--tau-grid={g}"));
        }
        if let Some(r) = self.region {
            parts.push(format!("--region={r}"));
        }
        if let Some(t) = self.t {
            parts.push(format!("--t={t:?}"));
        }
        parts.push(format!("--terms={}", self.terms));
        parts.push(format!("--seed={}", self.seed));
        parts.push(format!("--trials={}", self.trials));
        parts.push(format!("--tol={:?}", self.tol));
        parts.join(" ")
    }
}
