//! Observed time series with optional row labels (e.g. timestamps).

use crate::error::{Error, Result};

/// An ordered sequence of real-valued observations.
///
/// Construction rejects non-finite values, so every downstream computation
/// (kernels, prefix sums, variance estimators) can assume finite inputs and
/// stay branch-free.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(Self {
            values,
            labels: None,
        })
    }

    /// Series with one label per observation, e.g. timestamps from a CSV.
    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                values: values.len(),
            });
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label for a 1-based observation index, if labels are present.
    pub fn label(&self, index1: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(index1.checked_sub(1)?))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
