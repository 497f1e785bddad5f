//! Test reports: the outcome of one epidemic-change test, renderable as
//! human-readable text or a machine-readable key-value file.

use std::fmt::Write as _;

use crate::limitdist::TableKey;
use crate::scan::Sided;
use crate::variance::VarianceEstimate;

/// Critical value at one significance level, with the rejection verdict.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValue {
    pub alpha: f64,
    pub value: f64,
    pub reject: bool,
}

/// Everything a test run reports. Segment indices are 1-based inclusive:
/// the estimated changed segment is {start, ..., end}.
#[derive(Debug, Clone)]
pub struct TestReport {
    pub input: String,
    pub n: usize,
    pub kernel: String,
    pub gamma: f64,
    pub sided: Sided,
    pub variance: VarianceEstimate,
    pub raw_stat: f64,
    pub normalized_stat: f64,
    pub p_value: f64,
    /// Sorted by alpha ascending.
    pub critical_values: Vec<CriticalValue>,
    pub segment_start: usize,
    pub segment_end: usize,
    pub segment_start_label: Option<String>,
    pub segment_end_label: Option<String>,
    pub table: TableKey,
}

const REPORT_FORMAT_HEADER: &str = "episcan test report v1";

impl TestReport {
    /// Rejection verdict at the most stringent requested level.
    pub fn rejected_at_smallest_alpha(&self) -> bool {
        self.critical_values.first().is_some_and(|c| c.reject)
    }

    /// Machine-readable rendering: a self-describing key-value file with a
    /// fixed field order, byte-identical for identical inputs and seeds.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_FORMAT_HEADER}");
        let _ = writeln!(out, "input = {}", self.input);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "kernel = {}", self.kernel);
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "sided = {}", self.sided.as_str());
        let _ = writeln!(out, "variance_method = {}", self.variance.method.as_str());
        let _ = writeln!(out, "variance_value = {}", self.variance.value);
        let _ = writeln!(out, "variance_bandwidth = {}", self.variance.bandwidth);
        let _ = writeln!(
            out,
            "variance_lag_kernel = {}",
            self.variance.lag_kernel.map_or("none", |k| k.as_str())
        );
        let _ = writeln!(out, "variance_degenerate = {}", self.variance.degenerate);
        let _ = writeln!(out, "variance_floored = {}", self.variance.floored);
        let _ = writeln!(out, "raw_stat = {}", self.raw_stat);
        let _ = writeln!(out, "normalized_stat = {}", self.normalized_stat);
        let _ = writeln!(out, "p_value = {}", self.p_value);
        for c in &self.critical_values {
            let _ = writeln!(out, "critical_{} = {}", c.alpha, c.value);
            let _ = writeln!(out, "reject_{} = {}", c.alpha, c.reject);
        }
        let _ = writeln!(out, "segment_start = {}", self.segment_start);
        let _ = writeln!(out, "segment_end = {}", self.segment_end);
        if let Some(label) = &self.segment_start_label {
            let _ = writeln!(out, "segment_start_label = {label}");
        }
        if let Some(label) = &self.segment_end_label {
            let _ = writeln!(out, "segment_end_label = {label}");
        }
        let _ = writeln!(out, "table_grid = {}", self.table.grid);
        let _ = writeln!(out, "table_reps = {}", self.table.reps);
        let _ = writeln!(out, "table_seed = {}", self.table.seed);
        out
    }

    /// Human-readable rendering for the terminal.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Epidemic-change test: {} kernel, gamma = {}, {}-sided",
            self.kernel,
            self.gamma,
            self.sided.as_str()
        );
        let _ = writeln!(out, "  input              {}", self.input);
        let _ = writeln!(out, "  n                  {}", self.n);
        let mut vdesc = format!(
            "{:.6e} ({}",
            self.variance.value,
            self.variance.method.as_str()
        );
        if self.variance.bandwidth > 0.0 {
            let _ = write!(vdesc, ", bandwidth {}", self.variance.bandwidth);
        }
        if let Some(k) = self.variance.lag_kernel {
            let _ = write!(vdesc, ", {}", k.as_str());
        }
        vdesc.push(')');
        if self.variance.floored {
            vdesc.push_str(" [floored]");
        }
        let _ = writeln!(out, "  variance estimate  {vdesc}");
        let _ = writeln!(out, "  raw statistic      {:.6}", self.raw_stat);
        let _ = writeln!(out, "  normalized         {:.6}", self.normalized_stat);
        let _ = writeln!(out, "  p-value            {:.6}", self.p_value);
        for c in &self.critical_values {
            let _ = writeln!(
                out,
                "  alpha {:<6}       critical {:.4}  -> {}",
                c.alpha,
                c.value,
                if c.reject { "REJECT" } else { "no rejection" }
            );
        }
        let segment = match (&self.segment_start_label, &self.segment_end_label) {
            (Some(a), Some(b)) => format!(
                "{} .. {} ({} .. {})",
                self.segment_start, self.segment_end, a, b
            ),
            _ => format!("{} .. {}", self.segment_start, self.segment_end),
        };
        let _ = writeln!(out, "  estimated segment  {segment}");
        let _ = writeln!(
            out,
            "  quantile table     gamma {}, {}-sided, grid {}, reps {}, seed {}",
            self.table.gamma,
            self.table.sided.as_str(),
            self.table.grid,
            self.table.reps,
            self.table.seed
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variance::VarianceEstimate;

    fn sample_report() -> TestReport {
        TestReport {
            input: "data.csv".into(),
            n: 100,
            kernel: "wilcoxon".into(),
            gamma: 0.2,
            sided: Sided::Two,
            variance: VarianceEstimate::known(1.0 / 3.0),
            raw_stat: 1234.5,
            normalized_stat: 2.5,
            p_value: 0.003,
            critical_values: vec![
                CriticalValue {
                    alpha: 0.01,
                    value: 2.677,
                    reject: false,
                },
                CriticalValue {
                    alpha: 0.05,
                    value: 2.344,
                    reject: true,
                },
            ],
            segment_start: 41,
            segment_end: 60,
            segment_start_label: None,
            segment_end_label: None,
            table: TableKey::new(0.2, Sided::Two, 1000, 1000, 1).unwrap(),
        }
    }

    #[test]
    fn smallest_alpha_verdict_uses_first_entry() {
        let report = sample_report();
        assert!(!report.rejected_at_smallest_alpha());
    }

    #[test]
    fn machine_format_is_self_describing() {
        let text = sample_report().render_machine();
        assert!(text.starts_with("episcan test report v1\n"));
        assert!(text.contains("kernel = wilcoxon\n"));
        assert!(text.contains("critical_0.05 = 2.344\n"));
        assert!(text.contains("reject_0.05 = true\n"));
        assert!(text.contains("segment_start = 41\n"));
        assert!(!text.contains("segment_start_label"));
    }

    #[test]
    fn labels_appear_when_present() {
        let mut report = sample_report();
        report.segment_start_label = Some("2012-01".into());
        report.segment_end_label = Some("2016-06".into());
        let text = report.render_machine();
        assert!(text.contains("segment_start_label = 2012-01\n"));
        let human = report.render_text();
        assert!(human.contains("(2012-01 .. 2016-06)"));
    }
}
