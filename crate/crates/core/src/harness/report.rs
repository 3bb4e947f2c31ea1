use super::config::OutputFormat;

/// Common interface of experiment reports.
pub trait Report {
    fn passed(&self) -> bool;
    fn to_csv(&self) -> String;
    fn to_json(&self) -> serde_json::Value;
    /// One human-readable line.
    fn summary(&self) -> String;
    /// Descriptions of the rows behind a failed verdict.
    fn failures(&self) -> Vec<String> {
        Vec::new()
    }
}

pub fn render(report: &dyn Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).expect("json values serialize");
            s.push('\n');
            s
        }
    }
}

/// Shortest round-trip scientific representation; identical for identical
/// bits, so tables are byte-for-byte reproducible.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn csv_line(cells: &[String]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}
