//! Plain-text file formats: measures, couplings, and extracted maps as CSV.
//!
//! Measures are exchanged as `x1,...,xd,weight` with one point per row;
//! couplings as `i,j,mass` with zero-based indices into the corresponding
//! measure files. Floats are written in Rust's shortest round-trip form, so a
//! write/read cycle reproduces every value bit for bit. Writers go through
//! [`atomic_write`], which stages the bytes in a sibling temp file and
//! renames it into place, so a crash cannot leave a half-written report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::mapping::MapExtraction;
use crate::measures::{Coupling, CouplingError, DiscreteMeasure, MeasureError, Point};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    FieldCount { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: could not parse '{value}' as a number")]
    BadNumber { path: String, line: usize, value: String },
    #[error("{path}: missing or malformed header (expected '{expected}')")]
    BadHeader { path: String, expected: String },
    #[error("{path}: no data rows")]
    NoRows { path: String },
    #[error("invalid measure in {path}: {source}")]
    Measure {
        path: String,
        #[source]
        source: MeasureError,
    },
    #[error("invalid coupling in {path}: {source}")]
    Coupling {
        path: String,
        #[source]
        source: CouplingError,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io { path: path.display().to_string(), source }
}

/// Writes `contents` to `path` via a temp file in the same directory plus a
/// rename, so concurrent readers never observe a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), FormatError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Serializes a measure as `x1,...,xd,weight` rows.
pub fn measure_to_csv(measure: &DiscreteMeasure) -> String {
    let d = measure.dim();
    let mut out = String::new();
    for k in 1..=d {
        let _ = write!(out, "x{k},");
    }
    out.push_str("weight\n");
    for (p, &w) in measure.points().iter().zip(measure.weights()) {
        for c in p.coords() {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{w}");
    }
    out
}

pub fn write_measure_csv(measure: &DiscreteMeasure, path: &Path) -> Result<(), FormatError> {
    atomic_write(path, &measure_to_csv(measure))
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let p = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| FormatError::NoRows { path: p.clone() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let d = cols.len().saturating_sub(1);
    let expected: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    let header_ok = d >= 1
        && cols[d].eq_ignore_ascii_case("weight")
        && cols[..d].iter().zip(&expected).all(|(a, b)| a.eq_ignore_ascii_case(b));
    if !header_ok {
        return Err(FormatError::BadHeader {
            path: p,
            expected: format!("{},weight", expected.join(",")),
        });
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != d + 1 {
            return Err(FormatError::FieldCount {
                path: p,
                line: lineno + 1,
                expected: d + 1,
                found: fields.len(),
            });
        }
        let mut coords = Vec::with_capacity(d);
        for f in &fields[..d] {
            coords.push(parse_f64(f, &p, lineno + 1)?);
        }
        points.push(
            Point::new(coords)
                .map_err(|e| FormatError::Measure { path: p.clone(), source: e })?,
        );
        weights.push(parse_f64(fields[d], &p, lineno + 1)?);
    }
    if points.is_empty() {
        return Err(FormatError::NoRows { path: p });
    }
    DiscreteMeasure::new(points, weights).map_err(|e| FormatError::Measure { path: p, source: e })
}

/// Serializes a coupling as `i,j,mass` rows in (i, j) order.
pub fn coupling_to_csv(coupling: &Coupling) -> String {
    let mut out = String::from("i,j,mass\n");
    for e in coupling.entries() {
        let _ = writeln!(out, "{},{},{}", e.i, e.j, e.mass);
    }
    out
}

pub fn write_coupling_csv(coupling: &Coupling, path: &Path) -> Result<(), FormatError> {
    atomic_write(path, &coupling_to_csv(coupling))
}

pub fn read_coupling_csv(
    path: &Path,
    source: impl Into<Arc<DiscreteMeasure>>,
    target: impl Into<Arc<DiscreteMeasure>>,
) -> Result<Coupling, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let p = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| FormatError::NoRows { path: p.clone() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() != 3
        || !cols[0].eq_ignore_ascii_case("i")
        || !cols[1].eq_ignore_ascii_case("j")
        || !cols[2].eq_ignore_ascii_case("mass")
    {
        return Err(FormatError::BadHeader { path: p, expected: "i,j,mass".into() });
    }
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(FormatError::FieldCount {
                path: p,
                line: lineno + 1,
                expected: 3,
                found: fields.len(),
            });
        }
        let i = parse_usize(fields[0], &p, lineno + 1)?;
        let j = parse_usize(fields[1], &p, lineno + 1)?;
        let mass = parse_f64(fields[2], &p, lineno + 1)?;
        entries.push((i, j, mass));
    }
    Coupling::new(source, target, entries)
        .map_err(|e| FormatError::Coupling { path: p, source: e })
}

/// Serializes an extracted map as
/// `source_index,target_index,dominant_mass,source_weight` rows.
pub fn map_to_csv(map: &MapExtraction, source: &DiscreteMeasure) -> String {
    let mut out = String::from("source_index,target_index,dominant_mass,source_weight\n");
    for (i, &j) in map.assignment.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i, j, map.dominant_mass[i], source.weight(i));
    }
    out
}

pub fn write_map_csv(
    map: &MapExtraction,
    source: &DiscreteMeasure,
    path: &Path,
) -> Result<(), FormatError> {
    atomic_write(path, &map_to_csv(map, source))
}

fn parse_f64(s: &str, path: &str, line: usize) -> Result<f64, FormatError> {
    s.parse().map_err(|_| FormatError::BadNumber {
        path: path.to_string(),
        line,
        value: s.to_string(),
    })
}

fn parse_usize(s: &str, path: &str, line: usize) -> Result<usize, FormatError> {
    s.parse().map_err(|_| FormatError::BadNumber {
        path: path.to_string(),
        line,
        value: s.to_string(),
    })
}
