//! Table emission: Markdown in the appendix layout and plain CSV.

use super::density::{FamilyRun, FieldRecord};

/// Four significant digits; scientific below `0.01`.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.abs() < 0.01 {
        return format!("{x:.3e}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Md,
}

impl std::str::FromStr for Format {
    type Err = crate::error::TmodError;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            _ => Err(crate::error::TmodError::Invalid(format!("unknown format `{s}`"))),
        }
    }
}

pub const TABLE_CSV_HEADER: &str = "label,count,ratio,predicted,deviation";

pub fn table_csv(run: &FamilyRun) -> String {
    let mut s = String::from(TABLE_CSV_HEADER);
    s.push('\n');
    let opt = |x: Option<f64>| x.map(sig4).unwrap_or_default();
    for r in &run.rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.label, r.count, sig4(r.ratio), opt(r.predicted), opt(r.deviation)));
    }
    let ratio = if run.total == 0 { 0.0 } else { run.undetermined as f64 / run.total as f64 };
    s.push_str(&format!("undetermined,{},{},,\n", run.undetermined, sig4(ratio)));
    s
}

/// One column per label, an empirical row and a predicted row.
pub fn table_md(run: &FamilyRun) -> String {
    let mut s = format!("{}: {} fields, {} undetermined\n\n", run.family, run.total, run.undetermined);
    let labels: Vec<&str> = run.rows.iter().map(|r| r.label.as_str()).collect();
    s.push_str(&format!("| B \\ G | {} |\n", labels.join(" | ")));
    s.push_str(&format!("|---|{}\n", "---|".repeat(labels.len())));
    let emp: Vec<String> = run.rows.iter().map(|r| sig4(r.ratio)).collect();
    s.push_str(&format!("| {} | {} |\n", run.family.bound, emp.join(" | ")));
    let pred: Vec<String> = run.rows.iter().map(|r| r.predicted.map(sig4).unwrap_or_else(|| "-".into())).collect();
    s.push_str(&format!("| predicted | {} |\n", pred.join(" | ")));
    s
}

pub const FIELDS_CSV_HEADER: &str = "m,p,label,method,note";

pub fn fields_csv(p: u64, fields: &[FieldRecord]) -> String {
    let mut wr = csv::WriterBuilder::new().from_writer(Vec::new());
    let _ = wr.write_record(FIELDS_CSV_HEADER.split(','));
    for f in fields {
        let _ = wr.write_record([&f.m.to_string(), &p.to_string(), f.label.as_deref().unwrap_or(""), &f.method, &f.note]);
    }
    String::from_utf8(wr.into_inner().unwrap_or_default()).expect("csv output is UTF-8")
}

pub fn render(run: &FamilyRun, format: Format) -> String {
    match format {
        Format::Csv => table_csv(run),
        Format::Md => table_md(run),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_digits() {
        assert_eq!(sig4(0.75), "0.7500");
        assert_eq!(sig4(0.04688), "0.04688");
        assert_eq!(sig4(0.1875), "0.1875");
        assert_eq!(sig4(2.930e-3), "2.930e-3");
        assert_eq!(sig4(0.0), "0");
        assert_eq!(sig4(1.0), "1.000");
    }
}
