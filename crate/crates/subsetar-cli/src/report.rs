//! Report plumbing: the JSON run document, TSV plot files, and the
//! 6-significant-digit formatting used in the human tables.

use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Formats a number to six significant digits for the human-readable
/// tables. JSON output keeps full precision.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).clamp(0, 12) as usize;
    format!("{x:.decimals$}")
}

/// Hex SHA-256 digest of the input file bytes.
pub fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Assembles the self-contained run document: version stamp, input digest,
/// echoed configuration and results.
pub fn run_report(command: &str, input: Value, config: Value, results: Value) -> Value {
    json!({
        "tool": "subsetar",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "input": input,
        "config": config,
        "results": results,
    })
}

/// Writes a JSON document with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Writes rows of plot data as TSV with a header line; full precision.
pub fn write_tsv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formats_by_magnitude() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(17.0624365), "17.0624");
        assert_eq!(sig6(-82.245), "-82.2450");
        assert_eq!(sig6(0.0123456789), "0.0123457");
        assert_eq!(sig6(123456.789), "123457");
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(b"17.0\n16.6\n"), digest(b"17.0\n16.6\n"),);
        assert_ne!(digest(b"17.0\n"), digest(b"16.6\n"));
    }
}
