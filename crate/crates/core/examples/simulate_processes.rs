//! Generates each benchmark process and prints a few sample statistics.
//!
//! cargo run --release --example simulate_processes

use lrdwave::harness::ProcessId;
use lrdwave::synthesis::{generate, io::write_series};

fn main() -> lrdwave::Result<()> {
    let n = 4096;
    let d = 0.3;
    println!("{:<16}{:>10}{:>10}{:>10}", "process", "mean", "var", "lag-1");
    for (k, id) in ProcessId::ALL.into_iter().enumerate() {
        let ts = generate(&id.model(d), n, 1000 + k as u64)?;
        let x = &ts.values;
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let cov1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n as f64;
        println!("{:<16}{:>10.3}{:>10.3}{:>10.3}", id.name(), mean, var, cov1 / var);
    }

    let path = std::env::temp_dir().join("lrdwave_x2.csv");
    let x2 = generate(&ProcessId::X2.model(d), n, 7)?;
    write_series(&path, &x2.values)?;
    println!("wrote {}", path.display());
    Ok(())
}
