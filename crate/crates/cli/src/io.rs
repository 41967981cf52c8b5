//! Matrix text formats.
//!
//! CSV: one matrix row per line, comma-separated decimal floats. Blank lines
//! and lines starting with `#` are ignored.
//!
//! JSON: `{"rows": r, "cols": c, "data": [...]}` with `data` in row-major
//! order.
//!
//! Both writers print the shortest decimal that parses back to the same
//! `f64`, so a write/read round trip is bit-exact.

use std::fmt::Write as _;

use clap::ValueEnum;
use colsubset_core::DenseMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn parse_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

/// Guesses the format from the first non-blank character.
pub fn detect_format(text: &str) -> Format {
    match text.trim_start().chars().next() {
        Some('{') => Format::Json,
        _ => Format::Csv,
    }
}

pub fn parse_matrix(text: &str, format: Format) -> Result<DenseMatrix, CliError> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Json => parse_json(text),
    }
}

fn parse_csv(text: &str) -> Result<DenseMatrix, CliError> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0;
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(lineno, format!("non-numeric token {tok:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(lineno, format!("non-finite value {tok:?}")));
            }
            data.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(parse_error(
                    lineno,
                    format!("ragged row: expected {c} values, found {count}"),
                ))
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error(1, "empty matrix"))?;
    DenseMatrix::new(rows, cols, data).map_err(|e| parse_error(1, e.to_string()))
}

fn parse_json(text: &str) -> Result<DenseMatrix, CliError> {
    let doc: MatrixDoc =
        serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.to_string()))?;
    if doc.data.len() != doc.rows * doc.cols {
        return Err(parse_error(
            1,
            format!(
                "shape mismatch: {} x {} needs {} values, found {}",
                doc.rows,
                doc.cols,
                doc.rows * doc.cols,
                doc.data.len()
            ),
        ));
    }
    DenseMatrix::new(doc.rows, doc.cols, doc.data).map_err(|e| parse_error(1, e.to_string()))
}

pub fn emit_matrix(m: &DenseMatrix, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
        Format::Json => {
            let doc = MatrixDoc {
                rows: m.rows(),
                cols: m.cols(),
                data: m.data().to_vec(),
            };
            let mut s = serde_json::to_string(&doc).expect("finite matrix serializes");
            s.push('\n');
            s
        }
    }
}
