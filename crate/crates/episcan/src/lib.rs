//! # episcan
//!
//! Detection of epidemic (changed-segment) anomalies in time series via
//! weighted two-sample U-statistic scan tests.
//!
//! Under the null hypothesis all observations share one distribution; under
//! the alternative an inner segment {k*+1, ..., m*} follows a different one,
//! reverting afterwards. The scan statistic maximizes a kernel-based
//! heterogeneity measure over all candidate segments, weighted by
//! [t(1-t)]^(-gamma) to boost sensitivity to short segments. Normalized by
//! n^(3/2) and a variance estimate, it converges to a weighted sup of
//! Brownian-bridge increments whose quantiles are obtained by Monte Carlo.
//!
//! ## Modules
//!
//! - [`kernel`] — antisymmetric kernels: CUSUM, Wilcoxon, user-defined
//! - [`scan`] — prefix double sums, the weighted scan, segment estimate
//! - [`variance`] — iid, fixed-bandwidth and adaptive long-run variance
//! - [`limitdist`] — Brownian-bridge sup simulation, quantile tables, cache
//! - [`simulate`] — AR(1) data generation, epidemic shifts, size/power runs
//! - [`cli`] — CSV ingestion and the drivers behind the `episcan` binary
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release -p episcan --example kernels
//! cargo run --release -p episcan --example scan_segment
//! cargo run --release -p episcan --example variance_estimators
//! cargo run --release -p episcan --example critical_values
//! cargo run --release -p episcan --example hypothesis_test
//! cargo run --release -p episcan --example size_power_experiment
//! cargo run --release -p episcan --example csv_report
//! ```
//!
//! ## Quick start
//!
//! ```
//! use episcan::{Kernel, ScanParams, Sided, TimeSeries};
//!
//! // ten flat observations with a level shift in the middle
//! let mut values = vec![0.0; 30];
//! for v in &mut values[10..20] {
//!     *v += 4.0;
//! }
//! values.iter_mut().enumerate().for_each(|(i, v)| *v += (i as f64 * 0.7).sin() * 0.1);
//!
//! let series = TimeSeries::new(values).unwrap();
//! let params = ScanParams::new(0.2, Sided::Two).unwrap();
//! let result = episcan::scan::scan(&series, &Kernel::wilcoxon(), &params).unwrap();
//! let (start, end) = result.segment();
//! assert!(start >= 9 && end <= 21);
//! ```

pub mod cli;
pub mod error;
pub mod kernel;
pub mod limitdist;
pub mod report;
pub mod scan;
pub mod series;
pub mod simulate;
pub mod variance;

pub use error::{Error, Result};
pub use kernel::{FastPath, Kernel};
pub use limitdist::{QuantileTable, TableCache, TableKey};
pub use scan::{ScanParams, ScanResult, Sided};
pub use series::TimeSeries;
pub use variance::{LagKernel, VarianceEstimate, VarianceMethod};
