//! The chi-square goodness-of-fit test accepts a FARIMA path and rejects a
//! series whose memory changes halfway through.
//!
//! cargo run --release --example goodness_of_fit

use lrdwave::estimation::{estimate, EstimatorConfig, GammaSource};
use lrdwave::synthesis::{gen_farima, gen_mfarima, Innovation};

fn main() -> lrdwave::Result<()> {
    let n = 10_000;
    let config = EstimatorConfig::default();
    let mut accepted = [0usize; 2];
    let reps = 20;
    for seed in 0..reps {
        let h0 = gen_farima(0.3, &[], &[], Innovation::Gaussian, n, seed)?.values;
        let h1 = gen_mfarima(0.1, 0.4, n, 1000 + seed)?.values;
        for (slot, x) in [h0, h1].iter().enumerate() {
            if estimate(x, &config, GammaSource::Exact)?.gof_accepted() {
                accepted[slot] += 1;
            }
        }
    }
    println!("FARIMA(0, 0.3, 0)      accepted {}/{reps}", accepted[0]);
    println!("MFARIMA(0.1 then 0.4)  accepted {}/{reps}", accepted[1]);
    Ok(())
}
