//! The asymptotic covariance of the log-variogram and the variance factor
//! sigma^2_d(l) that scales the CLT for the weighted estimator.
//!
//! cargo run --release --example gamma_covariance

use lrdwave::wavelet::{gamma_matrix, sigma2_grid};

fn main() -> lrdwave::Result<()> {
    let g = gamma_matrix(0.2, 4)?;
    println!("Gamma(d = 0.2, l = 4):");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:9.5}", g.gamma[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }

    let ds = [0.0, 0.1, 0.2, 0.3, 0.4];
    let ells = [5, 10, 20, 50];
    let grid = sigma2_grid(&ds, &ells)?;
    print!("\n{:>6}", "d \\ l");
    for l in ells {
        print!("{l:>10}");
    }
    println!();
    for row in grid.chunks(ells.len()) {
        print!("{:>6}", row[0].0);
        for &(_, _, s2) in row {
            print!("{s2:>10.4}");
        }
        println!();
    }
    Ok(())
}
