//! Thin command-line front end; all logic lives in the library.
//!
//! Exit codes: 0 = no rejection at the smallest requested alpha,
//! 2 = rejection, 1 = any error (including usage errors).

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use episcan::cli::{
    ingest_csv, run_quantiles, run_test_on_series, IngestOptions, QuantilesArgs, TestArgs,
    LOW_PRECISION_REPS,
};
use episcan::limitdist::{TableCache, TableKey};
use episcan::simulate::{
    run_experiment, ExperimentSpec, KernelChoice, VarianceSpec, DEFAULT_TABLE_GRID,
    DEFAULT_TABLE_REPS, DEFAULT_TABLE_SEED,
};
use episcan::variance::LagKernel;
use episcan::Sided;

#[derive(Parser)]
#[command(
    name = "episcan",
    version,
    about = "Epidemic (changed-segment) detection in time series",
    after_help = "Quantile tables are cached on disk; the directory is taken from \
                  --cache-dir, then the EPISCAN_CACHE_DIR environment variable, then \
                  ./.episcan-cache."
)]
struct Cli {
    /// Directory for cached quantile tables
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a CSV series for an epidemic change
    Test(TestCmd),
    /// Simulate and print quantile tables of the limit distribution
    Quantiles(QuantilesCmd),
    /// Run a size/power experiment and write rejection frequencies as CSV
    Simulate(SimulateCmd),
}

#[derive(Args)]
struct TestCmd {
    /// Input CSV file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// 1-based column holding the observations
    #[arg(long, default_value_t = 1)]
    column: usize,

    /// 1-based column holding timestamps to echo in the report
    #[arg(long, value_name = "COL")]
    timestamp_column: Option<usize>,

    /// Skip the first row
    #[arg(long)]
    skip_header: bool,

    /// Kernel: cusum or wilcoxon
    #[arg(long, default_value = "wilcoxon", value_parser = parse_kernel)]
    kernel: KernelChoice,

    /// Weight exponent, in [0, 0.5)
    #[arg(long, default_value_t = 0.2)]
    gamma: f64,

    /// one or two
    #[arg(long, default_value = "two", value_parser = parse_sided)]
    sided: Sided,

    /// known:<v> | iid | lrv:<bandwidth> | adaptive[:<blocks>]
    #[arg(long, default_value = "lrv:4", value_parser = parse_variance)]
    variance: VarianceSpec,

    /// Lag window for the long-run variance: qs or bartlett
    #[arg(long, default_value = "qs", value_parser = parse_lag_kernel)]
    lag_kernel: LagKernel,

    /// Comma-separated significance levels; the verdict uses the smallest
    #[arg(long, default_value = "0.05", value_delimiter = ',', value_parser = parse_alpha)]
    alpha: Vec<f64>,

    /// Grid size of the simulated limit distribution
    #[arg(long, default_value_t = DEFAULT_TABLE_GRID)]
    grid: u32,

    /// Monte Carlo replicates of the simulated limit distribution
    #[arg(long, default_value_t = DEFAULT_TABLE_REPS)]
    reps: u32,

    /// Seed of the simulated limit distribution
    #[arg(long, default_value_t = DEFAULT_TABLE_SEED)]
    table_seed: u64,

    /// Also write the report as a machine-readable key-value file
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct QuantilesCmd {
    /// Comma-separated gamma values
    #[arg(
        long,
        default_value = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45",
        value_delimiter = ',',
        value_parser = clap::value_parser!(f64)
    )]
    gamma: Vec<f64>,

    /// one or two
    #[arg(long, default_value = "two", value_parser = parse_sided)]
    sided: Sided,

    #[arg(long, default_value_t = DEFAULT_TABLE_GRID)]
    grid: u32,

    #[arg(long, default_value_t = DEFAULT_TABLE_REPS)]
    reps: u32,

    #[arg(long, default_value_t = DEFAULT_TABLE_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SimulateCmd {
    /// Flat key-value experiment config file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set reps=3000 (repeatable)
    #[arg(long, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output CSV path; stdout when omitted
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_kernel(s: &str) -> Result<KernelChoice, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_sided(s: &str) -> Result<Sided, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_variance(s: &str) -> Result<VarianceSpec, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_lag_kernel(s: &str) -> Result<LagKernel, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let alpha: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(alpha)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cache = TableCache::resolve(cli.cache_dir.as_deref());
    let outcome = match cli.command {
        Command::Test(cmd) => cmd_test(cmd, &cache),
        Command::Quantiles(cmd) => cmd_quantiles(cmd, &cache),
        Command::Simulate(cmd) => cmd_simulate(cmd, &cache),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_test(cmd: TestCmd, cache: &TableCache) -> episcan::Result<ExitCode> {
    let args = TestArgs {
        input: cmd.input.clone(),
        ingest: IngestOptions {
            value_column: cmd.column,
            timestamp_column: cmd.timestamp_column,
            skip_header: cmd.skip_header,
        },
        kernel: cmd.kernel,
        gamma: cmd.gamma,
        sided: cmd.sided,
        variance: cmd.variance,
        lag_kernel: cmd.lag_kernel,
        alphas: cmd.alpha,
        grid: cmd.grid,
        reps: cmd.reps,
        table_seed: cmd.table_seed,
    };
    let series = ingest_csv(&args.input, &args.ingest)?;
    let key = TableKey::new(
        args.gamma,
        args.sided,
        args.grid,
        args.reps,
        args.table_seed,
    )?;
    if cache.load(&key)?.is_none() {
        eprintln!(
            "simulating the limit distribution (gamma {}, {}-sided, grid {}, {} reps); \
             cached under {} for future runs",
            key.gamma,
            key.sided.as_str(),
            key.grid,
            key.reps,
            cache.dir().display()
        );
    }
    let report = run_test_on_series(&series, &args, cache)?;
    print!("{}", report.render_text());
    if let Some(path) = &cmd.report {
        std::fs::write(path, report.render_machine()).map_err(|e| episcan::Error::io(path, e))?;
    }
    Ok(if report.rejected_at_smallest_alpha() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_quantiles(cmd: QuantilesCmd, cache: &TableCache) -> episcan::Result<ExitCode> {
    if cmd.reps < LOW_PRECISION_REPS {
        eprintln!(
            "warning: {} replicates give low-precision quantiles; consider --reps {} or more",
            cmd.reps, LOW_PRECISION_REPS
        );
    }
    let args = QuantilesArgs {
        gammas: cmd.gamma,
        sided: cmd.sided,
        grid: cmd.grid,
        reps: cmd.reps,
        seed: cmd.seed,
    };
    let out = run_quantiles(&args, cache)?;
    print!("{}", out.render());
    eprintln!(
        "{} of {} tables served from cache ({})",
        out.cache_hits,
        out.rows.len(),
        cache.dir().display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(cmd: SimulateCmd, cache: &TableCache) -> episcan::Result<ExitCode> {
    let mut text = match &cmd.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| episcan::Error::io(path, e))?,
        None => String::new(),
    };
    for kv in &cmd.set {
        if !kv.contains('=') {
            return Err(episcan::Error::InvalidArgument {
                what: "--set override",
                text: kv.clone(),
            });
        }
        text.push('\n');
        text.push_str(kv);
    }
    let spec = ExperimentSpec::parse_kv(&text)?;
    let report = run_experiment(&spec, cache)?;
    match &cmd.output {
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(|e| episcan::Error::io(path, e))?;
            report
                .write_csv(&mut file)
                .map_err(|e| episcan::Error::io(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            report
                .write_csv(&mut stdout.lock())
                .map_err(|e| episcan::Error::io("<stdout>", e))?;
        }
    }
    let mut err = std::io::stderr().lock();
    let _ = writeln!(
        err,
        "{} replicates in {:.1?}; degenerate-variance events: {}",
        spec.reps, report.runtime, report.degenerate
    );
    Ok(ExitCode::SUCCESS)
}
