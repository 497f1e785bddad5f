//! Library backing for the `episcan` binary: CSV ingestion and the drivers
//! behind the `test`, `quantiles` and `simulate` subcommands. Everything here
//! is plain library code so the binary stays a thin argument parser and
//! integration tests can exercise the same paths directly.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::limitdist::{TableCache, TableKey};
use crate::report::{CriticalValue, TestReport};
use crate::scan::{scan, ScanParams, Sided};
use crate::series::TimeSeries;
use crate::simulate::{KernelChoice, VarianceSpec};
use crate::variance::LagKernel;

/// Column selection for CSV ingestion. Columns are 1-based.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub value_column: usize,
    pub timestamp_column: Option<usize>,
    pub skip_header: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            value_column: 1,
            timestamp_column: None,
            skip_header: false,
        }
    }
}

/// Read an ordered series from a CSV file. Rows are numbered physically
/// (1-based, header included); blank lines are skipped; any unparseable or
/// non-finite value in the selected column is a hard error naming its row.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<TimeSeries> {
    if opts.value_column == 0 {
        return Err(Error::InvalidArgument {
            what: "value column",
            text: "0 (columns are 1-based)".into(),
        });
    }
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let row = i + 1;
        if row == 1 && opts.skip_header {
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |col: usize| -> Result<&str> {
            fields.get(col - 1).copied().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row,
                what: "column",
                text: format!("need column {col}, row has {}", fields.len()),
            })
        };
        let text = field(opts.value_column)?;
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row,
            what: "value",
            text: text.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                what: "non-finite value",
                text: text.to_string(),
            });
        }
        values.push(value);
        if let Some(ts) = opts.timestamp_column {
            labels.push(field(ts)?.to_string());
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    if opts.timestamp_column.is_some() {
        TimeSeries::with_labels(values, labels)
    } else {
        TimeSeries::new(values)
    }
}

/// Arguments of the `test` subcommand.
#[derive(Debug, Clone)]
pub struct TestArgs {
    pub input: PathBuf,
    pub ingest: IngestOptions,
    pub kernel: KernelChoice,
    pub gamma: f64,
    pub sided: Sided,
    pub variance: VarianceSpec,
    pub lag_kernel: LagKernel,
    /// Significance levels; the verdict (and exit code) uses the smallest.
    pub alphas: Vec<f64>,
    pub grid: u32,
    pub reps: u32,
    pub table_seed: u64,
}

/// Run one epidemic-change test end to end: ingest, scan, estimate the
/// variance, normalize and compare against the (cached) quantile table.
pub fn run_test(args: &TestArgs, cache: &TableCache) -> Result<TestReport> {
    let series = ingest_csv(&args.input, &args.ingest)?;
    run_test_on_series(&series, args, cache)
}

/// Same as [`run_test`] but on an already-ingested series.
pub fn run_test_on_series(
    series: &TimeSeries,
    args: &TestArgs,
    cache: &TableCache,
) -> Result<TestReport> {
    let params = ScanParams::new(args.gamma, args.sided)?;
    let mut alphas = args.alphas.clone();
    for &a in &alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidAlpha(a));
        }
    }
    alphas.sort_unstable_by(f64::total_cmp);
    alphas.dedup();

    let kernel = args.kernel.to_kernel();
    let result = scan(series, &kernel, &params)?;

    let estimate = args.variance.estimate(series, &kernel, args.lag_kernel)?;
    if estimate.degenerate {
        return Err(Error::DegenerateVariance(estimate.value));
    }

    let key = TableKey::new(
        args.gamma,
        args.sided,
        args.grid,
        args.reps,
        args.table_seed,
    )?;
    let (table, _cached) = cache.load_or_simulate(&key)?;

    let normalized = result.normalized(estimate.sd())?;
    let critical_values = alphas
        .iter()
        .map(|&alpha| {
            let value = table.upper_quantile(alpha)?;
            Ok(CriticalValue {
                alpha,
                value,
                reject: normalized > value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (segment_start, segment_end) = result.segment();
    Ok(TestReport {
        input: args.input.display().to_string(),
        n: series.len(),
        kernel: kernel.name().to_string(),
        gamma: args.gamma,
        sided: args.sided,
        variance: estimate,
        raw_stat: result.raw_stat(),
        normalized_stat: normalized,
        p_value: table.p_value(normalized),
        critical_values,
        segment_start,
        segment_end,
        segment_start_label: series.label(segment_start).map(String::from),
        segment_end_label: series.label(segment_end).map(String::from),
        table: key,
    })
}

/// Upper-quantile levels printed by the `quantiles` subcommand, from the
/// median down to the 0.1% level.
pub const QUANTILE_LEVELS: [f64; 9] = [0.5, 0.2, 0.1, 0.05, 0.025, 0.01, 0.005, 0.0025, 0.001];

/// Replicate counts below this print a low-precision warning.
pub const LOW_PRECISION_REPS: u32 = 1000;

/// Arguments of the `quantiles` subcommand.
#[derive(Debug, Clone)]
pub struct QuantilesArgs {
    pub gammas: Vec<f64>,
    pub sided: Sided,
    pub grid: u32,
    pub reps: u32,
    pub seed: u64,
}

/// One row of the printed quantile table.
#[derive(Debug, Clone)]
pub struct QuantileRow {
    pub gamma: f64,
    pub quantiles: [f64; 9],
}

/// Output of the `quantiles` subcommand.
#[derive(Debug, Clone)]
pub struct QuantilesOutput {
    pub sided: Sided,
    pub grid: u32,
    pub reps: u32,
    pub seed: u64,
    pub rows: Vec<QuantileRow>,
    pub cache_hits: usize,
}

impl QuantilesOutput {
    pub fn low_precision(&self) -> bool {
        self.reps < LOW_PRECISION_REPS
    }

    /// Fixed-width table, one row per gamma, columns 50% .. 0.1%.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Upper quantiles, {}-sided (grid {}, reps {}, seed {})",
            self.sided.as_str(),
            self.grid,
            self.reps,
            self.seed
        );
        let _ = write!(out, "{:<12}", "gamma");
        for level in QUANTILE_LEVELS {
            let _ = write!(out, "{:>8}", format!("{}%", level * 100.0));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<12}", row.gamma);
            for q in row.quantiles {
                let _ = write!(out, "{q:>8.3}");
            }
            out.push('\n');
        }
        out
    }
}

/// Simulate (or load) tables for every requested gamma and collect the
/// printed quantile rows; replicates are persisted in the cache.
pub fn run_quantiles(args: &QuantilesArgs, cache: &TableCache) -> Result<QuantilesOutput> {
    if args.gammas.is_empty() {
        return Err(Error::InvalidArgument {
            what: "gamma list",
            text: "empty".into(),
        });
    }
    let mut cache_hits = 0;
    for &gamma in &args.gammas {
        let key = TableKey::new(gamma, args.sided, args.grid, args.reps, args.seed)?;
        if cache.load(&key)?.is_some() {
            cache_hits += 1;
        }
    }
    let combos: Vec<(f64, Sided)> = args.gammas.iter().map(|&g| (g, args.sided)).collect();
    let tables = cache.ensure_tables(&combos, args.grid, args.reps, args.seed)?;
    let rows = tables
        .iter()
        .map(|table| {
            let mut quantiles = [0.0; 9];
            for (i, &level) in QUANTILE_LEVELS.iter().enumerate() {
                quantiles[i] = table.upper_quantile(level)?;
            }
            Ok(QuantileRow {
                gamma: table.key().gamma,
                quantiles,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantilesOutput {
        sided: args.sided,
        grid: args.grid,
        reps: args.reps,
        seed: args.seed,
        rows,
        cache_hits,
    })
}
