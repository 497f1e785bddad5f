//! Simulate quantile tables of the limit distribution and print them in the
//! usual layout (one row per gamma, upper quantiles from 50% to 0.1%).
//!
//! Uses a reduced grid and replicate count so it finishes in seconds; pass
//! larger values through the CLI (`episcan quantiles`) for production
//! tables.
//!
//! ```bash
//! cargo run --release -p episcan --example critical_values
//! ```

use episcan::cli::{run_quantiles, QuantilesArgs};
use episcan::limitdist::TableCache;
use episcan::Sided;

fn main() {
    let cache = TableCache::new(std::env::temp_dir().join("episcan-example-cache"));
    for sided in [Sided::One, Sided::Two] {
        let args = QuantilesArgs {
            gammas: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            sided,
            grid: 2000,
            reps: 5000,
            seed: 1729,
        };
        let out = run_quantiles(&args, &cache).unwrap();
        print!("{}", out.render());
        println!();
    }
    println!("replicates cached under {}", cache.dir().display());
}
