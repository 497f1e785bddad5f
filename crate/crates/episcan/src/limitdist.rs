//! Monte Carlo simulation of the limit distribution: weighted sups of
//! Brownian-bridge increments.
//!
//! The normalized scan statistic converges to
//!
//! ```text
//! T_gamma = sup_{0 <= s < t <= 1} |B(t) - B(s)| / [(t-s)(1-(t-s))]^gamma
//! ```
//!
//! (or the signed version for one-sided tests), with B a standard Brownian
//! bridge. No closed form is known for gamma > 0, so quantiles come from
//! simulation: the bridge is discretized on {i/grid} via scaled iid Gaussian
//! increments and the sup is taken over grid pairs, mirroring the scan's own
//! discretization. Replicates are seeded per-index from a counter-based
//! stream, so tables are bit-reproducible under any parallel schedule, and
//! sorted replicate sets are persisted in a small self-describing cache file
//! keyed by (gamma, sided, grid, reps, seed).

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scan::{validate_gamma, Sided};

/// Derive an independent RNG for one replicate of a seeded computation.
/// ChaCha streams keep replicates independent while letting any worker
/// thread reproduce replicate `stream` directly.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Identifies a simulated quantile table. Tables with equal keys are
/// bit-identical by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableKey {
    pub gamma: f64,
    pub sided: Sided,
    pub grid: u32,
    pub reps: u32,
    pub seed: u64,
}

impl TableKey {
    pub fn new(gamma: f64, sided: Sided, grid: u32, reps: u32, seed: u64) -> Result<Self> {
        validate_gamma(gamma)?;
        if grid < 2 {
            return Err(Error::InvalidGrid(grid));
        }
        if reps < 100 {
            return Err(Error::InvalidReps(reps));
        }
        Ok(Self {
            gamma,
            sided,
            grid,
            reps,
            seed,
        })
    }

    fn file_name(&self) -> String {
        format!(
            "bridge_g{}_{}_grid{}_reps{}_seed{}.tbl",
            self.gamma,
            self.sided.as_str(),
            self.grid,
            self.reps,
            self.seed
        )
    }
}

/// Sorted Monte Carlo replicates of the limit functional.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    key: TableKey,
    replicates: Vec<f64>,
}

impl QuantileTable {
    pub fn key(&self) -> &TableKey {
        &self.key
    }

    /// Replicates in ascending order.
    pub fn replicates(&self) -> &[f64] {
        &self.replicates
    }

    /// The ceil((1-alpha) * reps)-th order statistic (type-1 empirical
    /// quantile).
    pub fn upper_quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let reps = self.replicates.len();
        let rank = ((1.0 - alpha) * reps as f64).ceil() as usize;
        let rank = rank.clamp(1, reps);
        Ok(self.replicates[rank - 1])
    }

    /// Monte Carlo p-value (1 + #{replicates >= observed}) / (reps + 1);
    /// always in (0, 1].
    pub fn p_value(&self, observed: f64) -> f64 {
        let below = self.replicates.partition_point(|&r| r < observed);
        let ge = self.replicates.len() - below;
        (1 + ge) as f64 / (self.replicates.len() + 1) as f64
    }
}

/// One draw of the discretized weighted bridge sup.
///
/// Simulates W on {i/grid} by scaled iid Gaussian increments, sets
/// B(t) = W(t) - t W(1), and maximizes over grid pairs s < t (the pair
/// (0, 1) is excluded, mirroring the scan). O(grid) memory; O(grid^2) time
/// for gamma > 0 and O(grid) for gamma = 0, where the weight is identically
/// one and the sup collapses to the bridge range (two-sided) or maximal rise
/// (one-sided).
pub fn bridge_sup<R: Rng + ?Sized>(
    gamma: f64,
    sided: Sided,
    grid: u32,
    rng: &mut R,
) -> Result<f64> {
    validate_gamma(gamma)?;
    if grid < 2 {
        return Err(Error::InvalidGrid(grid));
    }
    let b = bridge_path(grid as usize, rng);
    if gamma == 0.0 {
        return Ok(unweighted_sup(&b, sided));
    }
    let weights = inv_weights(gamma, grid as usize);
    let combos = [ComboEval {
        sided,
        inv_w: &weights,
    }];
    Ok(weighted_sups(&b, &combos)[0])
}

/// Simulate one table. Replicate r uses the RNG stream (seed, r), so the
/// result does not depend on the number of worker threads.
pub fn simulate_table(key: &TableKey) -> Result<QuantileTable> {
    let mut tables = simulate_tables(&[(key.gamma, key.sided)], key.grid, key.reps, key.seed)?;
    Ok(tables.pop().expect("one combo in, one table out"))
}

/// Simulate several (gamma, sided) combinations in one pass over shared
/// bridge paths. Each combo's table is identical to what
/// [`simulate_table`] would produce for it alone; the O(grid^2) per-path
/// work is paid once instead of once per combo.
pub fn simulate_tables(
    combos: &[(f64, Sided)],
    grid: u32,
    reps: u32,
    seed: u64,
) -> Result<Vec<QuantileTable>> {
    let keys: Vec<TableKey> = combos
        .iter()
        .map(|&(gamma, sided)| TableKey::new(gamma, sided, grid, reps, seed))
        .collect::<Result<_>>()?;
    let g = grid as usize;

    let weights: Vec<Option<Vec<f64>>> = combos
        .iter()
        .map(|&(gamma, _)| (gamma > 0.0).then(|| inv_weights(gamma, g)))
        .collect();
    let all_unweighted = weights.iter().all(Option::is_none);

    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let b = bridge_path(g, &mut rng);
            if all_unweighted {
                combos
                    .iter()
                    .map(|&(_, sided)| unweighted_sup(&b, sided))
                    .collect()
            } else {
                let evals: Vec<ComboEval> = combos
                    .iter()
                    .zip(&weights)
                    .map(|(&(_, sided), w)| ComboEval {
                        sided,
                        inv_w: w.as_deref().unwrap_or(&[]),
                    })
                    .collect();
                weighted_sups(&b, &evals)
            }
        })
        .collect();

    Ok(keys
        .into_iter()
        .enumerate()
        .map(|(c, key)| {
            let mut replicates: Vec<f64> = per_rep.iter().map(|row| row[c]).collect();
            replicates.sort_unstable_by(f64::total_cmp);
            QuantileTable { key, replicates }
        })
        .collect())
}

/// B_0..B_grid of a discretized standard Brownian bridge.
pub(crate) fn bridge_path<R: Rng + ?Sized>(grid: usize, rng: &mut R) -> Vec<f64> {
    let step = (1.0 / grid as f64).sqrt();
    let mut w = Vec::with_capacity(grid + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 0..grid {
        let z: f64 = rng.sample(StandardNormal);
        acc += step * z;
        w.push(acc);
    }
    let w_end = acc;
    for (i, v) in w.iter_mut().enumerate() {
        *v -= i as f64 / grid as f64 * w_end;
    }
    w
}

/// 1/rho_gamma(gap/grid) for gap = 0..grid; index 0 is unused and the gap
/// `grid` (the excluded pair (0,1)) is never looked up.
fn inv_weights(gamma: f64, grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|gap| {
            if gap == 0 {
                0.0
            } else {
                let t = gap as f64 / grid as f64;
                (t * (1.0 - t)).powf(-gamma)
            }
        })
        .collect()
}

/// gamma = 0 shortcut: the two-sided sup is the bridge range, the one-sided
/// sup the maximal rise, both O(grid). Values coincide bit-for-bit with the
/// pair-loop route because both take the max of the same set of differences.
fn unweighted_sup(b: &[f64], sided: Sided) -> f64 {
    match sided {
        Sided::Two => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in b {
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
            hi - lo
        }
        Sided::One => {
            let mut min_so_far = b[0];
            let mut best = f64::NEG_INFINITY;
            for &v in &b[1..] {
                let rise = v - min_so_far;
                if rise > best {
                    best = rise;
                }
                if v < min_so_far {
                    min_so_far = v;
                }
            }
            best
        }
    }
}

struct ComboEval<'a> {
    sided: Sided,
    inv_w: &'a [f64],
}

/// Maximum and minimum of b[i+gap] - b[i] over i, with lane-parallel
/// accumulators: the loop-carried max/min dependency otherwise dominates the
/// O(grid^2) pass.
fn gap_extrema(hi: &[f64], lo: &[f64]) -> (f64, f64) {
    const LANES: usize = 8;
    let mut mx = [f64::NEG_INFINITY; LANES];
    let mut mn = [f64::INFINITY; LANES];
    let mut hi_chunks = hi.chunks_exact(LANES);
    let mut lo_chunks = lo.chunks_exact(LANES);
    for (ch, cl) in (&mut hi_chunks).zip(&mut lo_chunks) {
        for lane in 0..LANES {
            let d = ch[lane] - cl[lane];
            mx[lane] = if d > mx[lane] { d } else { mx[lane] };
            mn[lane] = if d < mn[lane] { d } else { mn[lane] };
        }
    }
    let (mut gx, mut gn) = (f64::NEG_INFINITY, f64::INFINITY);
    for lane in 0..LANES {
        if mx[lane] > gx {
            gx = mx[lane];
        }
        if mn[lane] < gn {
            gn = mn[lane];
        }
    }
    for (h, l) in hi_chunks.remainder().iter().zip(lo_chunks.remainder()) {
        let d = h - l;
        if d > gx {
            gx = d;
        }
        if d < gn {
            gn = d;
        }
    }
    (gx, gn)
}

/// One pass over all gaps, updating every combo's running sup. Combos with
/// gamma = 0 receive an empty weight slice and weight 1.
fn weighted_sups(b: &[f64], combos: &[ComboEval<'_>]) -> Vec<f64> {
    let grid = b.len() - 1;
    let mut best = vec![f64::NEG_INFINITY; combos.len()];
    for gap in 1..grid {
        let (mx, mn) = gap_extrema(&b[gap..], &b[..=grid - gap]);
        for (c, combo) in combos.iter().enumerate() {
            let w = if combo.inv_w.is_empty() {
                1.0
            } else {
                combo.inv_w[gap]
            };
            let v = match combo.sided {
                Sided::Two => w * if mx > -mn { mx } else { -mn },
                Sided::One => w * mx,
            };
            if v > best[c] {
                best[c] = v;
            }
        }
    }
    best
}

/// On-disk cache of quantile tables: one self-describing text file per key,
/// holding a metadata header followed by the sorted replicates. Writes are
/// atomic (write-temp-then-rename); a hit requires exact metadata match.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

const CACHE_FORMAT_HEADER: &str = "episcan quantile table v1";

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "EPISCAN_CACHE_DIR";

/// Default cache location when neither a flag nor the environment sets one.
pub const DEFAULT_CACHE_DIR: &str = ".episcan-cache";

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Resolve the directory from an optional CLI flag, then the
    /// environment, then the default.
    pub fn resolve(flag: Option<&Path>) -> Self {
        let dir = flag
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &TableKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Load the table for `key`, returning None on any miss: absent file,
    /// metadata mismatch, or unreadable content.
    pub fn load(&self, key: &TableKey) -> Result<Option<QuantileTable>> {
        let path = self.path_for(key);
        let file = match std::fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        let mut lines = BufReader::new(file).lines();
        let mut next = || -> Option<String> { lines.next().and_then(|l| l.ok()) };

        if next().as_deref() != Some(CACHE_FORMAT_HEADER) {
            return Ok(None);
        }
        let mut meta = std::collections::HashMap::new();
        loop {
            let line = match next() {
                Some(l) => l,
                None => return Ok(None),
            };
            if line == "---" {
                break;
            }
            if let Some((k, v)) = line.split_once(" = ") {
                meta.insert(k.to_string(), v.to_string());
            } else {
                return Ok(None);
            }
        }
        let matches = meta.get("gamma").and_then(|v| v.parse::<f64>().ok()) == Some(key.gamma)
            && meta.get("sided").map(String::as_str) == Some(key.sided.as_str())
            && meta.get("grid").and_then(|v| v.parse::<u32>().ok()) == Some(key.grid)
            && meta.get("reps").and_then(|v| v.parse::<u32>().ok()) == Some(key.reps)
            && meta.get("seed").and_then(|v| v.parse::<u64>().ok()) == Some(key.seed);
        if !matches {
            return Ok(None);
        }
        let mut replicates = Vec::with_capacity(key.reps as usize);
        for line in lines {
            let line = match line {
                Ok(l) => l,
                Err(_) => return Ok(None),
            };
            match line.parse::<f64>() {
                Ok(v) => replicates.push(v),
                Err(_) => return Ok(None),
            }
        }
        if replicates.len() != key.reps as usize || replicates.windows(2).any(|w| w[0] > w[1]) {
            return Ok(None);
        }
        Ok(Some(QuantileTable {
            key: *key,
            replicates,
        }))
    }

    /// Persist a table atomically; concurrent writers of the same key write
    /// identical bytes, so the rename race is benign.
    pub fn store(&self, table: &QuantileTable) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(&table.key);
        let tmp = self.dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        {
            let file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            let mut out = BufWriter::new(file);
            let key = &table.key;
            let write = |out: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
                writeln!(out, "{CACHE_FORMAT_HEADER}")?;
                writeln!(out, "gamma = {}", key.gamma)?;
                writeln!(out, "sided = {}", key.sided.as_str())?;
                writeln!(out, "grid = {}", key.grid)?;
                writeln!(out, "reps = {}", key.reps)?;
                writeln!(out, "seed = {}", key.seed)?;
                writeln!(out, "---")?;
                for v in &table.replicates {
                    writeln!(out, "{v}")?;
                }
                out.flush()
            };
            write(&mut out).map_err(|e| Error::io(&tmp, e))?;
        }
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Load if cached, otherwise simulate and persist. The boolean reports a
    /// cache hit.
    pub fn load_or_simulate(&self, key: &TableKey) -> Result<(QuantileTable, bool)> {
        if let Some(table) = self.load(key)? {
            return Ok((table, true));
        }
        let table = simulate_table(key)?;
        self.store(&table)?;
        Ok((table, false))
    }

    /// Ensure tables for all combos exist, simulating every missing one in a
    /// single shared pass over bridge paths.
    pub fn ensure_tables(
        &self,
        combos: &[(f64, Sided)],
        grid: u32,
        reps: u32,
        seed: u64,
    ) -> Result<Vec<QuantileTable>> {
        let mut out: Vec<Option<QuantileTable>> = Vec::with_capacity(combos.len());
        let mut missing = Vec::new();
        for (c, &(gamma, sided)) in combos.iter().enumerate() {
            let key = TableKey::new(gamma, sided, grid, reps, seed)?;
            match self.load(&key)? {
                Some(t) => out.push(Some(t)),
                None => {
                    out.push(None);
                    missing.push((c, (gamma, sided)));
                }
            }
        }
        if !missing.is_empty() {
            let fresh = simulate_tables(
                &missing.iter().map(|&(_, combo)| combo).collect::<Vec<_>>(),
                grid,
                reps,
                seed,
            )?;
            for ((slot, _), table) in missing.into_iter().zip(fresh) {
                self.store(&table)?;
                out[slot] = Some(table);
            }
        }
        Ok(out.into_iter().map(|t| t.expect("filled")).collect())
    }
}
