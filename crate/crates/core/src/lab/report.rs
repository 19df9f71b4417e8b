use std::fmt::Write as _;

/// Outcome of one acceptance rule, with the numbers it was decided on.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub rule: String,
    pub passed: bool,
    pub evidence: Vec<(String, f64)>,
}

impl Verdict {
    pub fn new(rule: impl Into<String>, passed: bool, evidence: Vec<(String, f64)>) -> Self {
        Self {
            rule: rule.into(),
            passed,
            evidence,
        }
    }
}

/// Per-level table of a study. Missing entries are `NaN` and print empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub study: String,
    pub levels: Vec<usize>,
    pub columns: Vec<String>,
    /// One row per level, one entry per column.
    pub rows: Vec<Vec<f64>>,
    /// Study-wide numbers such as reference values.
    pub scalars: Vec<(String, f64)>,
    pub verdicts: Vec<Verdict>,
}

impl ConvergenceReport {
    pub fn new(study: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            study: study.into(),
            levels: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            scalars: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn push_row(&mut self, level: usize, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.levels.push(level);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|s| s.1)
    }

    pub fn verdict(&self, rule: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.rule == rule)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (level, row) in self.levels.iter().zip(&self.rows) {
            let _ = write!(out, "{level}");
            for x in row {
                out.push(',');
                if !x.is_nan() {
                    let _ = write!(out, "{x:e}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("study: {}\n", self.study);
        for (name, value) in &self.scalars {
            let _ = writeln!(out, "  {name} = {value:e}");
        }
        for v in &self.verdicts {
            let _ = write!(out, "  [{}] {}", if v.passed { "PASS" } else { "FAIL" }, v.rule);
            let evidence: Vec<String> = v.evidence.iter().map(|(k, x)| format!("{k}={x:e}")).collect();
            if !evidence.is_empty() {
                let _ = write!(out, " ({})", evidence.join(", "));
            }
            out.push('\n');
        }
        out
    }
}

/// `max/min` of the finite entries, `∞` when the minimum is zero.
pub fn spread(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        return f64::NAN;
    }
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// True when every entry is below the previous one.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
