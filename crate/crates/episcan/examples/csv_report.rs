//! The CSV-to-report workflow behind `episcan test`: write a two-column CSV
//! (month, value) with a shifted stretch, ingest it with timestamps as
//! labels, run the test and render both report forms.
//!
//! ```bash
//! cargo run --release -p episcan --example csv_report
//! ```

use std::fmt::Write as _;

use episcan::cli::{run_test, IngestOptions, TestArgs};
use episcan::limitdist::{stream_rng, TableCache};
use episcan::simulate::{KernelChoice, VarianceSpec};
use episcan::variance::LagKernel;
use episcan::Sided;
use rand::Rng;

fn main() {
    let dir = std::env::temp_dir().join("episcan-example-csv");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("monthly.csv");

    let mut rng = stream_rng(11, 0);
    let mut csv = String::from("month,value\n");
    for i in 0..120 {
        let mut v: f64 = rng.random_range(20.0..30.0);
        if (48..84).contains(&i) {
            v -= 12.0; // three shifted years
        }
        let _ = writeln!(csv, "{:04}-{:02},{v:.2}", 2004 + i / 12, 1 + i % 12);
    }
    std::fs::write(&csv_path, csv).unwrap();

    let args = TestArgs {
        input: csv_path,
        ingest: IngestOptions {
            value_column: 2,
            timestamp_column: Some(1),
            skip_header: true,
        },
        kernel: KernelChoice::Wilcoxon,
        gamma: 0.2,
        sided: Sided::Two,
        variance: VarianceSpec::LrvFixed { bandwidth: 4.0 },
        lag_kernel: LagKernel::QuadraticSpectral,
        alphas: vec![0.01, 0.05],
        grid: 2000,
        reps: 10_000,
        table_seed: 1729,
    };
    let cache = TableCache::new(std::env::temp_dir().join("episcan-example-cache"));
    let report = run_test(&args, &cache).unwrap();

    println!("{}", report.render_text());
    println!("machine-readable form:\n");
    print!("{}", report.render_machine());
}
