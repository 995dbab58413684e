//! Compares the wavelet estimator with local Whittle and FEXP on clean and
//! trend-contaminated FARIMA paths.
//!
//! cargo run --release --example reference_estimators

use lrdwave::estimation::{estimate, EstimatorConfig, GammaSource};
use lrdwave::reference::{default_bandwidth, fexp_estimate, local_whittle};
use lrdwave::synthesis::{contaminate, generate, Innovation, ProcessModel};

fn main() -> lrdwave::Result<()> {
    let n = 10_000;
    println!("{:>5}{:>8}{:>10}{:>10}{:>10}", "d", "trend", "wavelet", "whittle", "fexp");
    for (k, &d) in [0.0, 0.2, 0.4].iter().enumerate() {
        let clean = generate(&ProcessModel::farima(d, Innovation::Gaussian), n, 11 + k as u64)?;
        for trend in [false, true] {
            let x = if trend { contaminate(&clean, true, false).values } else { clean.values.clone() };
            let w = estimate(&x, &EstimatorConfig::default(), GammaSource::Exact)?.d_tilde;
            let lw = local_whittle(&x, default_bandwidth(n))?;
            let fx = fexp_estimate(&x, 2.0)?.d;
            println!("{d:>5}{trend:>8}{w:>10.3}{lw:>10.3}{fx:>10.3}");
        }
    }
    Ok(())
}
