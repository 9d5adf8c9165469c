//! CSV and JSON writers for experiment outputs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::measurement::ProbabilityTable;

/// Formats with six significant digits, `%g`-style: fixed notation for exponents in
/// `-4..6`, scientific otherwise, trailing zeros dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Header row `corner,<col labels>`, then one row per table row.
pub fn table_csv(table: &ProbabilityTable, corner: &str) -> String {
    let mut out = String::new();
    out.push_str(corner);
    for c in &table.col_labels {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (label, row) in table.row_labels.iter().zip(&table.values) {
        out.push_str(label);
        for v in row {
            let _ = write!(out, ",{}", format_sig(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, table: &ProbabilityTable, corner: &str) -> Result<()> {
    std::fs::write(path, table_csv(table, corner))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
