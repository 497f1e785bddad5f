//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use std::sync::OnceLock;

use episcan::limitdist::{QuantileTable, TableCache};
use episcan::Sided;

/// Settings of the reference quantile tables (the published table layout).
pub const REF_GRID: u32 = 10_000;
pub const REF_REPS: u32 = 30_000;
pub const REF_SEED: u64 = 1729;

/// Every (gamma, sided) combination the suites consult at reference scale.
pub const REF_COMBOS: [(f64, Sided); 8] = [
    (0.0, Sided::Two),
    (0.1, Sided::Two),
    (0.2, Sided::Two),
    (0.3, Sided::Two),
    (0.4, Sided::Two),
    (0.0, Sided::One),
    (0.2, Sided::One),
    (0.4, Sided::One),
];

/// Cache directory persisted under target/, so the expensive reference pass
/// happens once per checkout rather than once per test run.
pub fn cache_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("quantile-cache")
}

/// Reference tables, simulated on first use (a single shared pass over
/// bridge paths covers every missing combination).
pub fn reference_tables() -> &'static (TableCache, Vec<QuantileTable>) {
    static TABLES: OnceLock<(TableCache, Vec<QuantileTable>)> = OnceLock::new();
    TABLES.get_or_init(|| {
        let cache = TableCache::new(cache_dir());
        let tables = cache
            .ensure_tables(&REF_COMBOS, REF_GRID, REF_REPS, REF_SEED)
            .expect("reference table simulation");
        (cache, tables)
    })
}

pub fn reference_table(gamma: f64, sided: Sided) -> &'static QuantileTable {
    let (_, tables) = reference_tables();
    REF_COMBOS
        .iter()
        .position(|&(g, s)| g == gamma && s == sided)
        .map(|i| &tables[i])
        .expect("combo listed in REF_COMBOS")
}

/// Print the per-criterion verdict line and fail the test on FAIL.
pub fn criterion(ok: bool, line: &str) {
    println!("[{}] {}", if ok { "PASS" } else { "FAIL" }, line);
    assert!(ok, "{line}");
}
