//! Antisymmetric bivariate kernels h(x, y) = −h(y, x).
//!
//! Antisymmetry makes the two-sample U-statistic centered under the null of
//! identical distributions, which is what qualifies a kernel for the scan
//! statistic. Two kernels ship with fast evaluation paths:
//!
//! - CUSUM: h(x, y) = x − y, reducing the scan to weighted partial sums;
//! - Wilcoxon: h(x, y) = 1{x<y} − 1{y<x}, rank-based and robust to outliers
//!   and heavy tails.
//!
//! Arbitrary user kernels can be antisymmetrized via
//! [`Kernel::antisymmetrized`], and a CUSUM test of transformed data is
//! available through [`Kernel::transformed_cusum`].

use std::fmt;
use std::sync::Arc;

type EvalFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Evaluation strategy tag, used by the scan and variance modules to pick
/// prefix-sum (CUSUM) or rank-counting (Wilcoxon) computations instead of the
/// generic O(n²) path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastPath {
    Cusum,
    Wilcoxon,
    Generic,
}

/// An antisymmetric kernel. Immutable and freely shareable across threads.
#[derive(Clone)]
pub struct Kernel {
    name: Arc<str>,
    fastpath: FastPath,
    eval: Arc<EvalFn>,
}

impl Kernel {
    /// The CUSUM kernel h(x, y) = x − y.
    pub fn cusum() -> Self {
        Self {
            name: "cusum".into(),
            fastpath: FastPath::Cusum,
            eval: Arc::new(|x, y| x - y),
        }
    }

    /// The Wilcoxon kernel h(x, y) = 1{x<y} − 1{y<x}. Ties evaluate to
    /// exactly 0; there is no midrank correction.
    pub fn wilcoxon() -> Self {
        Self {
            name: "wilcoxon".into(),
            fastpath: FastPath::Wilcoxon,
            eval: Arc::new(|x, y| ((x < y) as i64 - (y < x) as i64) as f64),
        }
    }

    /// Antisymmetrize an arbitrary bivariate function:
    /// the returned kernel evaluates f(x, y) − f(y, x).
    ///
    /// This also covers two-sample M-estimator kernels h(x, y) = ψ(x − y)
    /// for odd ψ, by passing f = (x, y) ↦ ψ(x − y).
    pub fn antisymmetrized<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            fastpath: FastPath::Generic,
            eval: Arc::new(move |x, y| f(x, y) - f(y, x)),
        }
    }

    /// CUSUM on transformed data: h(x, y) = ψ(x) − ψ(y).
    pub fn transformed_cusum<F>(name: &str, psi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            fastpath: FastPath::Generic,
            eval: Arc::new(move |x, y| psi(x) - psi(y)),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fastpath(&self) -> FastPath {
        self.fastpath
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("fastpath", &self.fastpath)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cusum_evaluates_difference() {
        let h = Kernel::cusum();
        assert_eq!(h.eval(3.0, 1.0), 2.0);
        assert_eq!(h.eval(7.25, 7.25), 0.0);
        assert_eq!(h.eval(1.0, 3.0), -2.0);
        assert_eq!(h.fastpath(), FastPath::Cusum);
    }

    #[test]
    fn wilcoxon_evaluates_indicators() {
        let h = Kernel::wilcoxon();
        assert_eq!(h.eval(1.0, 2.0), 1.0);
        assert_eq!(h.eval(2.0, 2.0), 0.0);
        assert_eq!(h.eval(5.0, -1.0), -1.0);
        assert_eq!(h.fastpath(), FastPath::Wilcoxon);
    }

    #[test]
    fn antisymmetrized_symmetric_function_vanishes() {
        let h = Kernel::antisymmetrized("product", |x, y| x * y);
        assert_eq!(h.eval(2.0, 3.0), 0.0);
    }

    #[test]
    fn antisymmetrized_projection_recovers_cusum() {
        let h = Kernel::antisymmetrized("first", |x, _| x);
        assert_eq!(h.eval(2.0, 3.0), -1.0);
        let c = Kernel::cusum();
        for (x, y) in [(0.5, -2.0), (3.0, 3.0), (-1.0, 4.0)] {
            assert_eq!(h.eval(x, y), c.eval(x, y));
        }
    }

    #[test]
    fn antisymmetrized_indicator_matches_wilcoxon_off_ties() {
        let h = Kernel::antisymmetrized("lt", |x, y| (x < y) as i64 as f64);
        let w = Kernel::wilcoxon();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x: f64 = rng.random_range(-5.0..5.0);
            let y: f64 = rng.random_range(-5.0..5.0);
            assert_eq!(h.eval(x, y), w.eval(x, y));
        }
    }

    #[test]
    fn transformed_cusum_examples() {
        let id = Kernel::transformed_cusum("identity", |x| x);
        let c = Kernel::cusum();
        for (x, y) in [(2.0, 1.0), (-3.5, 0.25), (1.0, 1.0)] {
            assert_eq!(id.eval(x, y), c.eval(x, y));
        }
        let sq = Kernel::transformed_cusum("square", |x| x * x);
        assert_eq!(sq.eval(2.0, 1.0), 3.0);
        let sign = Kernel::transformed_cusum("sign", f64::signum);
        assert_eq!(sign.eval(1.0, -1.0), 2.0);
        assert_eq!(sq.fastpath(), FastPath::Generic);
    }

    #[test]
    fn antisymmetry_on_random_pairs() {
        let kernels = [
            Kernel::cusum(),
            Kernel::wilcoxon(),
            Kernel::antisymmetrized("exp-diff", |x, y| (x - y).exp()),
            Kernel::transformed_cusum("cube", |x| x * x * x),
        ];
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-10.0..10.0);
            let y: f64 = rng.random_range(-10.0..10.0);
            for h in &kernels {
                let s = h.eval(x, y) + h.eval(y, x);
                if h.fastpath() == FastPath::Wilcoxon {
                    assert_eq!(s, 0.0);
                } else {
                    assert!(s.abs() <= 1e-12, "{}: {}", h.name(), s);
                }
                assert_eq!(h.eval(x, x), 0.0);
            }
        }
    }

    #[test]
    fn wilcoxon_range_and_order_dependence() {
        let w = Kernel::wilcoxon();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-100.0..100.0);
            let y: f64 = rng.random_range(-100.0..100.0);
            let v = w.eval(x, y);
            assert!(v == -1.0 || v == 0.0 || v == 1.0);
            // strictly increasing transform preserves the value
            let g = |t: f64| 2.0 * t + 1.0;
            assert_eq!(v, w.eval(g(x), g(y)));
            let g3 = |t: f64| t * t * t;
            assert_eq!(v, w.eval(g3(x), g3(y)));
        }
    }
}
