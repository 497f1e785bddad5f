//! Synthetic data generation and size/power experiments.
//!
//! The experiment design follows the simulation study layout: an AR(1)
//! process Y_i = a Y_{i-1} + eps_i with normal, centered-exponential or t5
//! innovations, standardized to unit marginal variance, with an epidemic
//! mean shift of height delta injected on a segment. Each replicate is
//! seeded from its index, so experiments parallelize without losing
//! reproducibility, and rejection frequencies are reported per
//! (kernel, gamma, alpha) cell against cached Monte Carlo critical values.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal, StudentT};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::limitdist::{stream_rng, TableCache};
use crate::scan::{prefix_double_sums, scan_prefix, validate_gamma, ScanParams, Sided};
use crate::series::TimeSeries;
use crate::variance::{lrv_adaptive_median, lrv_fixed, sigma_iid, LagKernel, VarianceEstimate};

/// Innovation law for the AR(1) driver. All three have mean zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Innovation {
    Normal,
    /// Exp(1) - 1: mean zero, variance one, skewness 2.
    ExponentialCentered,
    /// Student t with 5 degrees of freedom; variance 5/3.
    T5,
}

impl Innovation {
    pub fn variance(self) -> f64 {
        match self {
            Innovation::Normal | Innovation::ExponentialCentered => 1.0,
            Innovation::T5 => 5.0 / 3.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::ExponentialCentered => "exponential",
            Innovation::T5 => "t5",
        }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => rng.sample(StandardNormal),
            Innovation::ExponentialCentered => Exp::new(1.0).expect("rate 1").sample(rng) - 1.0,
            Innovation::T5 => StudentT::new(5.0).expect("5 df").sample(rng),
        }
    }
}

impl std::str::FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Innovation::Normal),
            "exponential" => Ok(Innovation::ExponentialCentered),
            "t5" => Ok(Innovation::T5),
            other => Err(Error::InvalidArgument {
                what: "innovation",
                text: other.to_string(),
            }),
        }
    }
}

/// iid draws from the innovation law.
pub fn gen_innovations<R: Rng + ?Sized>(dist: Innovation, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Number of warm-up steps before emitting AR(1) values; initialization bias
/// decays like |a|^burnin from the zero start.
const AR_BURN_IN: usize = 1000;

/// AR(1) series standardized to unit marginal variance:
/// emits Y_i / sqrt(var(eps) / (1 - a^2)) after a burn-in from Y = 0.
pub fn gen_ar1<R: Rng + ?Sized>(
    a: f64,
    dist: Innovation,
    n: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    if !a.is_finite() || a.abs() >= 1.0 {
        return Err(Error::InvalidArgument {
            what: "ar_coeff",
            text: a.to_string(),
        });
    }
    let sd = (dist.variance() / (1.0 - a * a)).sqrt();
    let mut y = 0.0;
    for _ in 0..AR_BURN_IN {
        y = a * y + dist.sample(rng);
    }
    let values = (0..n)
        .map(|_| {
            y = a * y + dist.sample(rng);
            y / sd
        })
        .collect();
    TimeSeries::new(values)
}

/// Add `delta` to observations k*+1 .. k*+len (1-based); len = 0 is the
/// null configuration and returns the input unchanged.
pub fn inject_segment(
    series: &TimeSeries,
    k_star: usize,
    len: usize,
    delta: f64,
) -> Result<TimeSeries> {
    let n = series.len();
    if k_star + len > n {
        return Err(Error::SegmentOutOfBounds {
            start: k_star,
            len,
            n,
        });
    }
    if len == 0 || delta == 0.0 {
        return Ok(series.clone());
    }
    let mut values = series.values().to_vec();
    for v in &mut values[k_star..k_star + len] {
        *v += delta;
    }
    TimeSeries::new(values)
}

/// CLI-selectable kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Cusum,
    Wilcoxon,
}

impl KernelChoice {
    pub fn to_kernel(self) -> Kernel {
        match self {
            KernelChoice::Cusum => Kernel::cusum(),
            KernelChoice::Wilcoxon => Kernel::wilcoxon(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelChoice::Cusum => "cusum",
            KernelChoice::Wilcoxon => "wilcoxon",
        }
    }
}

impl std::str::FromStr for KernelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cusum" => Ok(KernelChoice::Cusum),
            "wilcoxon" => Ok(KernelChoice::Wilcoxon),
            other => Err(Error::InvalidArgument {
                what: "kernel",
                text: other.to_string(),
            }),
        }
    }
}

/// Variance estimation strategy for a test or experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceSpec {
    /// Fixed sigma^2, e.g. a population value under a known model.
    Known(f64),
    Iid,
    LrvFixed {
        bandwidth: f64,
    },
    AdaptiveMedian {
        blocks: usize,
    },
}

impl VarianceSpec {
    /// Estimate sigma^2 on a series. The lag kernel applies to `LrvFixed`
    /// only; the adaptive median always uses the quadratic spectral window.
    pub fn estimate(
        &self,
        series: &TimeSeries,
        kernel: &Kernel,
        lag_kernel: LagKernel,
    ) -> Result<VarianceEstimate> {
        match *self {
            VarianceSpec::Known(v) => Ok(VarianceEstimate::known(v)),
            VarianceSpec::Iid => sigma_iid(series, kernel),
            VarianceSpec::LrvFixed { bandwidth } => {
                lrv_fixed(series, kernel, lag_kernel, bandwidth)
            }
            VarianceSpec::AdaptiveMedian { blocks } => lrv_adaptive_median(series, kernel, blocks),
        }
    }

    pub fn to_string_selector(&self) -> String {
        match *self {
            VarianceSpec::Known(v) => format!("known:{v}"),
            VarianceSpec::Iid => "iid".to_string(),
            VarianceSpec::LrvFixed { bandwidth } => format!("lrv:{bandwidth}"),
            VarianceSpec::AdaptiveMedian { blocks } => format!("adaptive:{blocks}"),
        }
    }
}

impl std::str::FromStr for VarianceSpec {
    type Err = Error;

    /// Selector syntax: `known:<v> | iid | lrv:<bandwidth> | adaptive[:<blocks>]`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidArgument {
            what: "variance selector",
            text: s.to_string(),
        };
        if s == "iid" {
            return Ok(VarianceSpec::Iid);
        }
        if s == "adaptive" {
            return Ok(VarianceSpec::AdaptiveMedian { blocks: 5 });
        }
        if let Some(rest) = s.strip_prefix("known:") {
            let v: f64 = rest.parse().map_err(|_| invalid())?;
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid());
            }
            return Ok(VarianceSpec::Known(v));
        }
        if let Some(rest) = s.strip_prefix("lrv:") {
            let bandwidth: f64 = rest.parse().map_err(|_| invalid())?;
            if !bandwidth.is_finite() || bandwidth <= 0.0 {
                return Err(invalid());
            }
            return Ok(VarianceSpec::LrvFixed { bandwidth });
        }
        if let Some(rest) = s.strip_prefix("adaptive:") {
            let blocks: usize = rest.parse().map_err(|_| invalid())?;
            if blocks == 0 {
                return Err(invalid());
            }
            return Ok(VarianceSpec::AdaptiveMedian { blocks });
        }
        Err(invalid())
    }
}

/// Full description of a size/power experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub ar_coeff: f64,
    pub innovation: Innovation,
    /// Segment start k*: the shift covers observations k*+1 .. k*+segment_len.
    pub segment_start: usize,
    /// Segment length L; 0 means the null hypothesis.
    pub segment_len: usize,
    pub delta: f64,
    pub gammas: Vec<f64>,
    pub kernels: Vec<KernelChoice>,
    pub variance: VarianceSpec,
    pub lag_kernel: LagKernel,
    pub alphas: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
    pub sided: Sided,
    pub table_grid: u32,
    pub table_reps: u32,
    pub table_seed: u64,
}

/// Default seed for experiment replicates.
pub const DEFAULT_EXPERIMENT_SEED: u64 = 271_828;
/// Default seed for simulated quantile tables.
pub const DEFAULT_TABLE_SEED: u64 = 1729;
/// Grid size used for the published quantile tables.
pub const DEFAULT_TABLE_GRID: u32 = 10_000;
/// Monte Carlo runs used for the published quantile tables.
pub const DEFAULT_TABLE_REPS: u32 = 30_000;

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n: 480,
            ar_coeff: 0.5,
            innovation: Innovation::Normal,
            segment_start: 0,
            segment_len: 0,
            delta: 0.0,
            gammas: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            kernels: vec![KernelChoice::Cusum, KernelChoice::Wilcoxon],
            variance: VarianceSpec::LrvFixed { bandwidth: 4.0 },
            lag_kernel: LagKernel::QuadraticSpectral,
            alphas: vec![0.05],
            reps: 1000,
            seed: DEFAULT_EXPERIMENT_SEED,
            sided: Sided::Two,
            table_grid: DEFAULT_TABLE_GRID,
            table_reps: DEFAULT_TABLE_REPS,
            table_seed: DEFAULT_TABLE_SEED,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooShort {
                min: 2,
                got: self.n,
            });
        }
        if !self.ar_coeff.is_finite() || self.ar_coeff.abs() >= 1.0 {
            return Err(Error::InvalidArgument {
                what: "ar_coeff",
                text: self.ar_coeff.to_string(),
            });
        }
        if self.segment_start + self.segment_len > self.n {
            return Err(Error::SegmentOutOfBounds {
                start: self.segment_start,
                len: self.segment_len,
                n: self.n,
            });
        }
        for &g in &self.gammas {
            validate_gamma(g)?;
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidAlpha(a));
            }
        }
        if self.gammas.is_empty() || self.kernels.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidArgument {
                what: "experiment spec",
                text: "gammas, kernels and alphas must be non-empty".into(),
            });
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument {
                what: "reps",
                text: "0".into(),
            });
        }
        if let VarianceSpec::AdaptiveMedian { blocks } = self.variance {
            if blocks == 0 || self.n < 10 * blocks {
                return Err(Error::TooFewPerBlock { n: self.n, blocks });
            }
        }
        Ok(())
    }

    /// Parse a flat key-value config ("key = value" lines, '#' comments).
    /// Unset keys keep their defaults.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        let bad = |what: &'static str, text: &str| Error::InvalidArgument {
            what,
            text: text.to_string(),
        };
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("config line", raw))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => spec.n = value.parse().map_err(|_| bad("n", value))?,
                "ar_coeff" => spec.ar_coeff = value.parse().map_err(|_| bad("ar_coeff", value))?,
                "innovation" => spec.innovation = value.parse()?,
                "segment_start" => {
                    spec.segment_start = value.parse().map_err(|_| bad("segment_start", value))?
                }
                "segment_len" => {
                    spec.segment_len = value.parse().map_err(|_| bad("segment_len", value))?
                }
                "delta" => spec.delta = value.parse().map_err(|_| bad("delta", value))?,
                "gammas" => spec.gammas = parse_list(value).map_err(|_| bad("gammas", value))?,
                "kernels" => {
                    spec.kernels = value
                        .split(',')
                        .map(|k| k.trim().parse())
                        .collect::<Result<_>>()?
                }
                "variance" => spec.variance = value.parse()?,
                "lag_kernel" => spec.lag_kernel = value.parse()?,
                "alphas" => spec.alphas = parse_list(value).map_err(|_| bad("alphas", value))?,
                "reps" => spec.reps = value.parse().map_err(|_| bad("reps", value))?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed", value))?,
                "sided" => spec.sided = value.parse()?,
                "table_grid" => {
                    spec.table_grid = value.parse().map_err(|_| bad("table_grid", value))?
                }
                "table_reps" => {
                    spec.table_reps = value.parse().map_err(|_| bad("table_reps", value))?
                }
                "table_seed" => {
                    spec.table_seed = value.parse().map_err(|_| bad("table_seed", value))?
                }
                other => {
                    return Err(Error::InvalidArgument {
                        what: "config key",
                        text: other.to_string(),
                    })
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Render as the same flat key-value format `parse_kv` reads.
    pub fn to_kv(&self) -> String {
        let join_f = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let kernels = self
            .kernels
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "n = {}\nar_coeff = {}\ninnovation = {}\nsegment_start = {}\n\
             segment_len = {}\ndelta = {}\ngammas = {}\nkernels = {}\n\
             variance = {}\nlag_kernel = {}\nalphas = {}\nreps = {}\nseed = {}\n\
             sided = {}\ntable_grid = {}\ntable_reps = {}\ntable_seed = {}\n",
            self.n,
            self.ar_coeff,
            self.innovation.as_str(),
            self.segment_start,
            self.segment_len,
            self.delta,
            join_f(&self.gammas),
            kernels,
            self.variance.to_string_selector(),
            self.lag_kernel.as_str(),
            join_f(&self.alphas),
            self.reps,
            self.seed,
            self.sided.as_str(),
            self.table_grid,
            self.table_reps,
            self.table_seed,
        )
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    value.split(',').map(|v| v.trim().parse()).collect()
}

/// One (kernel, gamma, alpha) cell of an experiment.
#[derive(Debug, Clone, Copy)]
pub struct RejectionCell {
    pub kernel: KernelChoice,
    pub gamma: f64,
    pub alpha: f64,
    pub rejections: u32,
    pub frequency: f64,
}

/// Experiment outcome: rejection frequencies plus the spec echo.
#[derive(Debug, Clone)]
pub struct RejectionReport {
    pub spec: ExperimentSpec,
    pub cells: Vec<RejectionCell>,
    /// (replicate, kernel) pairs whose variance estimate was degenerate;
    /// those replicates count as non-rejections.
    pub degenerate: u32,
    pub runtime: Duration,
}

impl RejectionReport {
    pub fn frequency(&self, kernel: KernelChoice, gamma: f64, alpha: f64) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.kernel == kernel && c.gamma == gamma && c.alpha == alpha)
            .map(|c| c.frequency)
    }

    /// CSV with one row per cell: kernel,gamma,alpha,rejection,reps,seed.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "kernel,gamma,alpha,rejection,reps,seed")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.kernel.as_str(),
                c.gamma,
                c.alpha,
                c.frequency,
                self.spec.reps,
                self.spec.seed
            )?;
        }
        Ok(())
    }
}

/// Run a full experiment: per replicate, generate AR(1) data, inject the
/// shift, normalize the scan statistic with the spec's variance method and
/// compare against cached critical values. Degenerate-variance replicates
/// are counted and treated as non-rejections rather than failing the run.
pub fn run_experiment(spec: &ExperimentSpec, cache: &TableCache) -> Result<RejectionReport> {
    spec.validate()?;
    let start = Instant::now();

    let combos: Vec<(f64, Sided)> = spec.gammas.iter().map(|&g| (g, spec.sided)).collect();
    let tables = cache.ensure_tables(&combos, spec.table_grid, spec.table_reps, spec.table_seed)?;
    let mut crit = vec![0.0; spec.gammas.len() * spec.alphas.len()];
    for (gi, table) in tables.iter().enumerate() {
        for (ai, &alpha) in spec.alphas.iter().enumerate() {
            crit[gi * spec.alphas.len() + ai] = table.upper_quantile(alpha)?;
        }
    }

    let params: Vec<ScanParams> = spec
        .gammas
        .iter()
        .map(|&g| ScanParams::new(g, spec.sided))
        .collect::<Result<_>>()?;
    let kernels: Vec<Kernel> = spec.kernels.iter().map(|k| k.to_kernel()).collect();
    let n_cells = spec.kernels.len() * spec.gammas.len() * spec.alphas.len();
    let nf = (spec.n as f64).powf(1.5);

    let (counts, degenerate) = (0..spec.reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(spec.seed, r);
            let base = gen_ar1(spec.ar_coeff, spec.innovation, spec.n, &mut rng)
                .expect("validated ar_coeff");
            let series = inject_segment(&base, spec.segment_start, spec.segment_len, spec.delta)
                .expect("validated segment");
            let mut counts = vec![0u32; n_cells];
            let mut degenerate = 0u32;
            for (ki, kernel) in kernels.iter().enumerate() {
                let estimate = spec.variance.estimate(&series, kernel, spec.lag_kernel);
                let sd = match estimate {
                    Ok(e) if !e.degenerate => e.sd(),
                    Ok(_) | Err(Error::DegenerateVariance(_)) => {
                        degenerate += 1;
                        continue;
                    }
                    Err(e) => panic!("variance estimation failed: {e}"),
                };
                let prefix = prefix_double_sums(&series, kernel).expect("n >= 2");
                for (gi, p) in params.iter().enumerate() {
                    let raw = scan_prefix(prefix.clone(), p).raw_stat();
                    let normalized = raw / (nf * sd);
                    for ai in 0..spec.alphas.len() {
                        if normalized > crit[gi * spec.alphas.len() + ai] {
                            counts[(ki * spec.gammas.len() + gi) * spec.alphas.len() + ai] += 1;
                        }
                    }
                }
            }
            (counts, degenerate)
        })
        .reduce(
            || (vec![0u32; n_cells], 0u32),
            |(mut a, da), (b, db)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, da + db)
            },
        );

    let mut cells = Vec::with_capacity(n_cells);
    for (ki, &kernel) in spec.kernels.iter().enumerate() {
        for (gi, &gamma) in spec.gammas.iter().enumerate() {
            for (ai, &alpha) in spec.alphas.iter().enumerate() {
                let rejections = counts[(ki * spec.gammas.len() + gi) * spec.alphas.len() + ai];
                cells.push(RejectionCell {
                    kernel,
                    gamma,
                    alpha,
                    rejections,
                    frequency: rejections as f64 / spec.reps as f64,
                });
            }
        }
    }

    Ok(RejectionReport {
        spec: spec.clone(),
        cells,
        degenerate,
        runtime: start.elapsed(),
    })
}
