//! Comparison reports and their JSON / text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// One statistic compared against its exact or limiting value.
///
/// `tolerance` is the allowed absolute deviation; `verdict` is pass iff
/// `|empirical - exact| <= tolerance` unless the statistic documents a
/// one-sided bound in `metadata["bound"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub empirical: f64,
    pub exact: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, Value>,
}

impl ComparisonReport {
    /// Two-sided check `|empirical - exact| <= tolerance`.
    pub fn within(name: impl Into<String>, empirical: f64, exact: f64, tolerance: f64) -> Self {
        let ok = (empirical - exact).abs() <= tolerance;
        ComparisonReport {
            name: name.into(),
            empirical,
            exact,
            tolerance,
            verdict: Verdict::from_bool(ok),
            metadata: BTreeMap::new(),
        }
    }

    /// One-sided check `empirical <= exact + tolerance`.
    pub fn at_most(name: impl Into<String>, empirical: f64, exact: f64, tolerance: f64) -> Self {
        let mut r = Self::within(name, empirical, exact, tolerance);
        r.verdict = Verdict::from_bool(empirical <= exact + tolerance);
        r.metadata.insert("bound".into(), Value::from("upper"));
        r
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// JSON object with sorted keys.
    pub fn to_json(&self) -> Value {
        // serde_json's default map is ordered, so field order is alphabetical.
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            let sorted: serde_json::Map<String, Value> = std::mem::take(map).into_iter().collect();
            *map = sorted;
        }
        v
    }
}

pub fn all_pass(reports: &[ComparisonReport]) -> bool {
    reports.iter().all(ComparisonReport::passed)
}

/// JSON array of reports, keys sorted, pretty-printed.
pub fn reports_to_json(reports: &[ComparisonReport]) -> String {
    let arr = Value::Array(reports.iter().map(ComparisonReport::to_json).collect());
    serde_json::to_string_pretty(&arr).expect("json")
}

/// Aligned-column text table.
pub fn reports_to_text(reports: &[ComparisonReport]) -> String {
    let header = ["name", "empirical", "exact", "tolerance", "verdict"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                format!("{:.6e}", r.empirical),
                format!("{:.6e}", r.exact),
                format!("{:.3e}", r.tolerance),
                r.verdict.as_str().to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; 5]| {
        let mut s = String::new();
        for (idx, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if idx == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header);
    for row in &rows {
        line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert!(ComparisonReport::within("a", 1.0, 1.05, 0.1).passed());
        assert!(!ComparisonReport::within("a", 1.0, 1.2, 0.1).passed());
        assert!(ComparisonReport::at_most("b", 0.0, 0.5, 0.0).passed());
        assert!(!ComparisonReport::at_most("b", 0.6, 0.5, 0.0).passed());
    }

    #[test]
    fn json_keys_sorted() {
        let r = ComparisonReport::within("tv", 0.1, 0.0, 0.2)
            .with("k", 2)
            .with("i", 5);
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"empirical":0.1,"exact":0.0,"metadata":{"i":5,"k":2},"name":"tv","tolerance":0.2,"verdict":"pass"}"#
        );
    }

    #[test]
    fn text_is_aligned() {
        let reports = vec![
            ComparisonReport::within("mean", 1.0, 1.0, 0.1),
            ComparisonReport::within("total_variation", 0.5, 0.0, 0.1),
        ];
        let text = reports_to_text(&reports);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
        assert!(lines[2].ends_with("fail"));
        assert!(text.lines().all(|l| !l.ends_with(' ')));
    }
}
