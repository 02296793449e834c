//! Text snapshots, CSV tables and atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use vpme_core::domain::{ScalarField, TorusGrid, VectorField};
use vpme_core::particles::ParticleEnsemble;

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn grid_header(grid: TorusGrid) -> String {
    format!("# torus d={} n={}\n", grid.dim(), grid.cells_per_dim())
}

pub fn format_field(f: &ScalarField) -> String {
    let mut out = grid_header(f.grid());
    for &v in f.values() {
        out.push_str(&num(v));
        out.push('\n');
    }
    out
}

/// Same header as a scalar snapshot, then one node per line with `d` components.
pub fn format_vector_field(e: &VectorField) -> String {
    let grid = e.grid();
    let mut out = grid_header(grid);
    for i in 0..grid.len() {
        let at = e.at(i);
        let line: Vec<String> = at[..grid.dim()].iter().map(|&v| num(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads `key=value` tokens of a `#` header line.
fn header_fields<'a>(line: &'a str, tag: &str) -> Option<Vec<(&'a str, &'a str)>> {
    let rest = line.strip_prefix('#')?.trim_start().strip_prefix(tag)?;
    rest.split_whitespace().map(|tok| tok.split_once('=')).collect()
}

fn header_value<T: std::str::FromStr>(fields: &[(&str, &str)], key: &str) -> Option<T> {
    fields.iter().find(|(k, _)| *k == key).and_then(|(_, v)| v.parse().ok())
}

pub fn parse_field(text: &str, path: &Path) -> Result<ScalarField, CliError> {
    let bad = |line: usize, reason: &str| CliError::Format { path: path.into(), line, reason: reason.into() };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let fields = header_fields(header, "torus").ok_or_else(|| bad(1, "expected `# torus d=<dim> n=<cells>`"))?;
    let (d, n) = match (header_value(&fields, "d"), header_value(&fields, "n")) {
        (Some(d), Some(n)) => (d, n),
        _ => return Err(bad(1, "header lacks d or n")),
    };
    let grid = TorusGrid::new(d, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(t.parse::<f64>().map_err(|_| bad(i + 2, "not a number"))?);
    }
    if values.len() != grid.len() {
        return Err(bad(0, &format!("expected {} values, found {}", grid.len(), values.len())));
    }
    Ok(ScalarField::new(grid, values)?)
}

pub fn read_field(path: &Path) -> Result<ScalarField, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_field(&text, path)
}

pub fn format_ensemble(ens: &ParticleEnsemble) -> String {
    let mut out = format!("# particles n={} d={} seed={}\n", ens.len(), ens.dim(), ens.rng_seed());
    for p in 0..ens.len() {
        let cols: Vec<String> =
            ens.position(p).iter().chain(ens.velocity(p)).chain([ens.weight(p)].iter()).map(|&v| num(v)).collect();
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_ensemble(text: &str, path: &Path) -> Result<ParticleEnsemble, CliError> {
    let bad = |line: usize, reason: &str| CliError::Format { path: path.into(), line, reason: reason.into() };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let fields = header_fields(header, "particles")
        .ok_or_else(|| bad(1, "expected `# particles n=<N> d=<dim> seed=<s>`"))?;
    let (n, d, seed): (usize, usize, u64) =
        match (header_value(&fields, "n"), header_value(&fields, "d"), header_value(&fields, "seed")) {
            (Some(n), Some(d), Some(s)) => (n, d, s),
            _ => return Err(bad(1, "header lacks n, d or seed")),
        };
    let (mut x, mut v, mut w) = (Vec::with_capacity(n * d), Vec::with_capacity(n * d), Vec::with_capacity(n));
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(i + 2, "not a number"))?;
        if cols.len() != 2 * d + 1 {
            return Err(bad(i + 2, &format!("expected {} columns", 2 * d + 1)));
        }
        x.extend_from_slice(&cols[..d]);
        v.extend_from_slice(&cols[d..2 * d]);
        w.push(cols[2 * d]);
    }
    if w.len() != n {
        return Err(bad(0, &format!("header announces {n} particles, found {}", w.len())));
    }
    Ok(ParticleEnsemble::new(d, x, v, w, seed)?)
}

pub fn read_ensemble(path: &Path) -> Result<ParticleEnsemble, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_ensemble(&text, path)
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Csv {
    body: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { body: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.body, "{}", cells.join(","));
    }

    pub fn numbers(&mut self, cells: &[f64]) {
        let cells: Vec<String> = cells.iter().map(|&v| num(v)).collect();
        self.row(&cells);
    }

    pub fn as_str(&self) -> &str {
        &self.body
    }
}
