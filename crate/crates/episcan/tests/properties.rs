//! Property tests over the public API.

use std::sync::OnceLock;

use episcan::limitdist::{simulate_table, QuantileTable, TableKey};
use episcan::scan::{prefix_double_sums, rho_gamma, scan, ScanParams};
use episcan::simulate::inject_segment;
use episcan::{Kernel, Sided, TimeSeries};
use proptest::collection::vec;
use proptest::prelude::*;

fn gamma_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.1), Just(0.25), Just(0.45)]
}

/// Brute-force scan statistic straight from the double-sum definition.
fn brute_scan_stat(x: &[f64], kernel: &Kernel, gamma: f64, sided: Sided) -> f64 {
    let n = x.len();
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        for m in (k + 1)..=n {
            if m - k == n {
                continue;
            }
            let mut d = 0.0;
            for i in k..m {
                for (j, &xj) in x.iter().enumerate() {
                    if !(k..m).contains(&j) {
                        d += kernel.eval(x[i], xj);
                    }
                }
            }
            let signed = match sided {
                Sided::Two => d.abs(),
                Sided::One => d,
            };
            let t = (m - k) as f64 / n as f64;
            let v = signed / rho_gamma(t, gamma).unwrap();
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn shared_table() -> &'static QuantileTable {
    static TABLE: OnceLock<QuantileTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        simulate_table(&TableKey::new(0.2, Sided::Two, 200, 500, 11).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_antisymmetric(x in -100.0..100.0f64, y in -100.0..100.0f64) {
        for kernel in [
            Kernel::cusum(),
            Kernel::wilcoxon(),
            Kernel::antisymmetrized("tanh-diff", |a: f64, b: f64| (a - b).tanh()),
        ] {
            prop_assert!((kernel.eval(x, y) + kernel.eval(y, x)).abs() <= 1e-12);
            prop_assert_eq!(kernel.eval(x, x), 0.0);
        }
    }

    #[test]
    fn rho_symmetry_and_range(t in 0.001..0.999f64, gamma in 0.0..0.5f64) {
        let a = rho_gamma(t, gamma).unwrap();
        let b = rho_gamma(1.0 - t, gamma).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn prefix_endpoints_vanish(x in vec(-50.0..50.0f64, 2..60)) {
        let series = TimeSeries::new(x).unwrap();
        let n = series.len();
        for kernel in [Kernel::cusum(), Kernel::wilcoxon()] {
            let u = prefix_double_sums(&series, &kernel).unwrap();
            prop_assert_eq!(u.len(), n + 1);
            prop_assert_eq!(u[0], 0.0);
            prop_assert!(u[n].abs() <= 1e-9 * (n as f64) * 50.0);
        }
    }

    #[test]
    fn scan_matches_brute_force(
        x in vec(-5.0..5.0f64, 2..14),
        gamma in gamma_strategy(),
        two_sided in any::<bool>(),
    ) {
        let sided = if two_sided { Sided::Two } else { Sided::One };
        let series = TimeSeries::new(x.clone()).unwrap();
        let params = ScanParams::new(gamma, sided).unwrap();
        for kernel in [Kernel::wilcoxon(), Kernel::cusum()] {
            let fast = scan(&series, &kernel, &params).unwrap().raw_stat();
            let brute = brute_scan_stat(&x, &kernel, gamma, sided);
            if kernel.name() == "wilcoxon" {
                prop_assert_eq!(fast, brute);
            } else {
                prop_assert!((fast - brute).abs() <= 1e-9 * brute.abs().max(1.0));
            }
        }
    }

    #[test]
    fn wilcoxon_scan_is_rank_invariant(
        x in vec(-1000i64..1000, 2..50),
        gamma in gamma_strategy(),
    ) {
        // x -> x^3 is strictly increasing and exact in f64 on this range
        let raw: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let cubed: Vec<f64> = x.iter().map(|&v| (v * v * v) as f64).collect();
        let params = ScanParams::new(gamma, Sided::Two).unwrap();
        let a = scan(&TimeSeries::new(raw).unwrap(), &Kernel::wilcoxon(), &params).unwrap();
        let b = scan(&TimeSeries::new(cubed).unwrap(), &Kernel::wilcoxon(), &params).unwrap();
        prop_assert_eq!(a.raw_stat(), b.raw_stat());
        prop_assert_eq!(a.segment(), b.segment());
    }

    #[test]
    fn one_sided_bounded_by_two_sided(
        x in vec(-5.0..5.0f64, 2..40),
        gamma in gamma_strategy(),
    ) {
        let series = TimeSeries::new(x).unwrap();
        for kernel in [Kernel::wilcoxon(), Kernel::cusum()] {
            let one = scan(&series, &kernel, &ScanParams::new(gamma, Sided::One).unwrap())
                .unwrap()
                .raw_stat();
            let two = scan(&series, &kernel, &ScanParams::new(gamma, Sided::Two).unwrap())
                .unwrap()
                .raw_stat();
            prop_assert!(one <= two + 1e-12);
        }
    }

    #[test]
    fn p_values_and_quantiles_well_behaved(
        observed in -10.0..10.0f64,
        alpha in 0.001..0.999f64,
    ) {
        let table = shared_table();
        let p = table.p_value(observed);
        prop_assert!(p > 0.0 && p <= 1.0);
        let q = table.upper_quantile(alpha).unwrap();
        let reps = table.replicates();
        prop_assert!(q >= reps[0] && q <= reps[reps.len() - 1]);
        // smaller alpha -> larger critical value
        let q_small = table.upper_quantile(alpha / 2.0).unwrap();
        prop_assert!(q_small >= q);
    }

    #[test]
    fn null_injections_are_identity(
        x in vec(-5.0..5.0f64, 2..30),
        delta in -3.0..3.0f64,
        start in 0usize..20,
    ) {
        let series = TimeSeries::new(x).unwrap();
        let n = series.len();
        let start = start.min(n);
        prop_assert_eq!(&inject_segment(&series, start, 0, delta).unwrap(), &series);
        prop_assert_eq!(
            &inject_segment(&series, 0, n, 0.0).unwrap(),
            &series
        );
    }
}
