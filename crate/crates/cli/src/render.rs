//! Flattens reports into one CSV table for external plotting.

use crate::error::{malformed, CliResult};
use isoslice::Report;
use std::collections::BTreeSet;

/// Reads reports from a suite file, a report array or a single report.
pub fn parse_reports(text: &str) -> CliResult<Vec<Report>> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| malformed(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let list = match v {
        serde_json::Value::Object(ref m) if m.contains_key("reports") => m["reports"].clone(),
        serde_json::Value::Object(ref m) if m.contains_key("report") => {
            serde_json::Value::Array(vec![m["report"].clone()])
        }
        serde_json::Value::Object(_) => serde_json::Value::Array(vec![v]),
        serde_json::Value::Array(_) => v,
        _ => return Err(malformed("expected a report, a list of reports or a suite")),
    };
    let items = list.as_array().cloned().unwrap_or_default();
    items
        .into_iter()
        .enumerate()
        .map(|(i, r)| serde_json::from_value(r).map_err(|e| malformed(format!("report {i}: {e}"))))
        .collect()
}

/// One row per report sorted by `(check, subject)`; one value and one
/// standard-error column per measured key.
pub fn render_csv(reports: &[Report]) -> CliResult<String> {
    let mut sorted: Vec<&Report> = reports.iter().collect();
    sorted.sort_by(|a, b| (&a.check, &a.subject).cmp(&(&b.check, &b.subject)));
    let keys: BTreeSet<&String> = reports.iter().flat_map(|r| r.measured.keys()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["check".to_string(), "subject".to_string(), "pass".to_string()];
    for k in &keys {
        header.push(k.to_string());
        header.push(format!("{k}_se"));
    }
    w.write_record(&header).map_err(|e| malformed(e.to_string()))?;
    for r in sorted {
        let mut row = vec![r.check.clone(), r.subject.clone(), r.pass.to_string()];
        for k in &keys {
            match r.measured.get(*k) {
                Some(e) => {
                    row.push(e.value.to_string());
                    row.push(e.std_error.to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        w.write_record(&row).map_err(|e| malformed(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| malformed(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_examples() {
        assert_eq!(render_csv(&[]).unwrap(), "check,subject,pass\n");
        let mut a = Report::new("thm-1.2", "cube:2");
        a.exact("d_G", 1.5);
        let mut b = Report::new("eq4", "grid");
        b.exact("cases", 3.0);
        let csv = render_csv(&[a, b]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "check,subject,pass,cases,cases_se,d_G,d_G_se");
        assert!(lines[1].starts_with("eq4,grid,true,3,0"));
        assert!(lines[2].starts_with("thm-1.2,cube:2,true,,,1.5,0"));
        assert!(parse_reports("[1, 2]").is_err());
        assert!(parse_reports("{").is_err());
    }
}
