//! Built-in and user-defined antisymmetric kernels.
//!
//! ```bash
//! cargo run --release -p episcan --example kernels
//! ```

use episcan::Kernel;

fn main() {
    let cusum = Kernel::cusum();
    let wilcoxon = Kernel::wilcoxon();
    // any bivariate function can be antisymmetrized: h(x,y) = f(x,y) - f(y,x)
    let log_ratio = Kernel::antisymmetrized("log-ratio", |x: f64, y: f64| {
        (1.0 + x * x / (1.0 + y * y)).ln()
    });
    // CUSUM on transformed data: h(x,y) = psi(x) - psi(y)
    let huber = Kernel::transformed_cusum("huber", |x: f64| x.clamp(-1.5, 1.5));

    let pairs = [(0.3, -1.2), (2.0, 2.0), (-4.0, 1.0), (0.5, 0.50001)];
    println!(
        "{:>8} {:>8} | {:>8} {:>9} {:>10} {:>8}",
        "x", "y", "cusum", "wilcoxon", "log-ratio", "huber"
    );
    for (x, y) in pairs {
        println!(
            "{x:>8.3} {y:>8.3} | {:>8.3} {:>9.3} {:>10.3} {:>8.3}",
            cusum.eval(x, y),
            wilcoxon.eval(x, y),
            log_ratio.eval(x, y),
            huber.eval(x, y)
        );
    }

    // antisymmetry check: h(x, y) + h(y, x) = 0 on every pair
    for kernel in [&cusum, &wilcoxon, &log_ratio, &huber] {
        let worst = pairs
            .iter()
            .map(|&(x, y)| (kernel.eval(x, y) + kernel.eval(y, x)).abs())
            .fold(0.0, f64::max);
        println!("{:<10} max |h(x,y)+h(y,x)| = {worst:.2e}", kernel.name());
    }
}
