//! CSV emission: fixed 12-significant-digit decimal notation, `\n` record
//! terminators, written through a temporary file so a failed run never
//! leaves a partial output behind.

use std::io::Write;
use std::path::Path;

use csv::{Terminator, WriterBuilder};
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Decimal rendering with exactly [`SIGNIFICANT_DIGITS`] significant digits;
/// zero renders as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // {:e} rounds correctly; only the layout changes below
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::with_capacity(SIGNIFICANT_DIGITS + 8);
    if v < 0.0 {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.push_str(&"0".repeat(int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

/// Writes `header` and `rows` to `path`, replacing any existing file only
/// once everything has been written.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::new("output_path", format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(|e| io(&e))?;
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(tmp);
    w.write_record(header).map_err(|e| io(&e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|&v| format_number(v)))
            .map_err(|e| io(&e))?;
    }
    let mut tmp = w.into_inner().map_err(|e| io(&e.error().to_string()))?;
    tmp.flush().map_err(|e| io(&e))?;
    tmp.persist(path).map_err(|e| io(&e.error))?;
    Ok(())
}
