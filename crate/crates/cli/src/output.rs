//! Self-describing CSV and JSON artifacts.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::config::RunConfig;

/// Provenance block written at the top of every artifact.
#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    /// Command line that reproduces the artifact.
    pub rerun: String,
    pub seed: u64,
    pub config: &'a RunConfig,
}

impl<'a> Header<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Header {
            program: "opuc",
            version: env!("CARGO_PKG_VERSION"),
            library_version: opuc_zeros::VERSION,
            rerun: config.command_line(),
            seed: config.seed,
            config,
        }
    }
}

/// A CSV cell. Floats use the shortest representation that round-trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_nan() => f.write_str("nan"),
            Cell::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

pub fn csv(header: &Header, columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let config = serde_json::to_string(header.config).expect("config serializes");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} {} (opuc-zeros {})",
        header.program, header.version, header.library_version
    );
    let _ = writeln!(out, "# rerun: {}", header.rerun);
    let _ = writeln!(out, "# seed: {}", header.seed);
    let _ = writeln!(out, "# config: {config}");
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Document<'a, T> {
    header: &'a Header<'a>,
    results: &'a T,
}

pub fn json<T: Serialize>(header: &Header, results: &T) -> String {
    let mut s =
        serde_json::to_string_pretty(&Document { header, results }).expect("results serialize");
    s.push('\n');
    s
}
