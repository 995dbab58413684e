//! A small Monte-Carlo table: X1 and X2 at N = 1000 with 25 replications.
//!
//! cargo run --release --example monte_carlo

use lrdwave::harness::{render_table, run_with_progress, McConfig, ProcessId};

fn main() -> lrdwave::Result<()> {
    let config = McConfig {
        processes: vec![ProcessId::X1, ProcessId::X2],
        ..McConfig::quick()
    };
    let summary = run_with_progress(&config, |c| eprintln!("{} d={:?} done", c.cell.process, c.cell.d))?;
    print!("{}", render_table(&summary));
    println!("total {:.1}s", summary.wall_seconds);
    Ok(())
}
