//! Prints log T_N(a) against log a for fGn; the slope is 2d.
//!
//! cargo run --release --example wavelet_variogram

use lrdwave::estimation::{ols_fit, variogram};
use lrdwave::synthesis::gen_fgn;

fn main() -> lrdwave::Result<()> {
    let hurst = 0.8;
    let x = gen_fgn(hurst, 20_000, 3)?.values;
    let scales: Vec<usize> = (0..8).map(|k| 8usize << k).filter(|&a| 2 * a <= x.len()).collect();
    let vg = variogram(&x, &scales)?;
    println!("{:>8}{:>12}{:>12}", "a", "log a", "log T");
    for (a, lt) in vg.scales.iter().zip(vg.log_t()) {
        println!("{a:>8}{:>12.4}{lt:>12.4}", (*a as f64).ln());
    }
    let (_, d) = ols_fit(&vg)?;
    println!("OLS d = {d:.4} (H - 1/2 = {:.4})", hurst - 0.5);
    Ok(())
}
