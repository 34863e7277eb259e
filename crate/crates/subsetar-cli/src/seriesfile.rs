//! The plain-text series file: one decimal value per line (LF or CRLF),
//! with an optional single header line detected by a non-numeric first
//! token.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// A parsed series file.
pub struct SeriesFile {
    pub values: Vec<f64>,
    /// Header line, when present.
    pub header: Option<String>,
    /// Raw bytes (for the input digest).
    pub bytes: Vec<u8>,
}

/// Reads and parses a series file. Values must be finite decimals; parse
/// failures report the 1-based line number.
pub fn read_series(path: &Path) -> Result<SeriesFile, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::parse(format!("{} is not valid UTF-8", path.display())))?;

    let mut values = Vec::new();
    let mut header = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r').trim();
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                if idx == 0 && !line.is_empty() {
                    header = Some(line.to_string());
                } else {
                    return Err(CliError::parse(format!(
                        "{}:{}: cannot parse {line:?} as a finite decimal",
                        path.display(),
                        idx + 1
                    )));
                }
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::parse(format!(
            "{} contains no numeric values",
            path.display()
        )));
    }
    Ok(SeriesFile {
        values,
        header,
        bytes,
    })
}

/// Writes a series file: one full-precision value per line, LF endings.
pub fn write_series(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let mut out = String::with_capacity(values.len() * 12);
    for v in values {
        writeln!(out, "{v}").expect("string write");
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
