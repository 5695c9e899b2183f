//! CSV emission: header row, comma-separated, `%.12g`-style numerics.

use std::fs;
use std::path::Path;

use anyhow::Context;

/// Formats like C's `%.12g`: 12 significant digits, fixed or scientific
/// depending on the decimal exponent, trailing zeros trimmed.
pub fn format_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // The exponent after rounding to 12 significant digits decides the form.
    let sci = format!("{v:.11e}");
    let epos = sci.find('e').expect("scientific form");
    let exp: i32 = sci[epos + 1..].parse().expect("exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = sci[..epos].trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}

/// Writes a CSV file with the given header and numeric rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_g12(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Reads back a CSV written by [`write_csv`]: returns (header, rows).
pub fn read_csv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .context("empty CSV")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.with_context(|| format!("parsing row {line:?}"))?);
    }
    Ok((header, rows))
}
