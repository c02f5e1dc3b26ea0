//! Input parsing and serialization for the two wire formats.
//!
//! CSV: m rows of m comma-separated decimals; lines starting with `#` and
//! blank lines are ignored. JSON: `{"m": <int>, "p": [[...], ...]}`. Values
//! are written back with Rust's shortest round-trip float formatting, so a
//! parse -> serialize -> parse cycle is bit-exact.

use std::path::Path;

use markov_ginv::Matrix;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    Csv,
    Json,
}

#[derive(Deserialize)]
struct JsonInput {
    m: usize,
    p: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Matrix, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::validation(
                    "ParseError",
                    format!("line {}: cannot parse `{}` as a number", lineno + 1, field.trim()),
                )
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation("ParseError", "no data rows found".into()));
    }
    Matrix::from_rows(&rows).map_err(CliError::from)
}

pub fn parse_json(text: &str) -> Result<Matrix, CliError> {
    let input: JsonInput = serde_json::from_str(text)
        .map_err(|e| CliError::validation("ParseError", format!("invalid JSON input: {e}")))?;
    if input.p.len() != input.m {
        return Err(CliError::validation(
            "ParseError",
            format!("declared m = {} but found {} rows", input.m, input.p.len()),
        ));
    }
    Matrix::from_rows(&input.p).map_err(CliError::from)
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn infer_format(path: &Path) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => InputFormat::Json,
        _ => InputFormat::Csv,
    }
}

/// Loads a matrix plus the sha256 digest of the raw file bytes.
pub fn load_matrix(
    path: &Path,
    format: Option<InputFormat>,
) -> Result<(Matrix, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::validation("IoError", format!("cannot read {}: {e}", path.display()))
    })?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::validation("ParseError", format!("{} is not valid UTF-8", path.display()))
    })?;
    let matrix = match format.unwrap_or_else(|| infer_format(path)) {
        InputFormat::Csv => parse_csv(&text)?,
        InputFormat::Json => parse_json(&text)?,
    };
    Ok((matrix, digest))
}
