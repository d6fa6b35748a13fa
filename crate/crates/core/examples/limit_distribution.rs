//! Samples of sqrt(n) d2 for a narrow and a wide Gaussian: the first settles,
//! the second keeps growing.
//!
//! Run with `cargo run --release --example limit_distribution`.

use smooth_wasserstein::experiments::{limit_distribution, LimitConfig};
use smooth_wasserstein::{DistributionSpec, Result, SeedSpec};

fn main() -> Result<()> {
    for s in [0.1, 1.0] {
        let cfg = LimitConfig {
            spec: DistributionSpec::gaussian(vec![0.0; 5], s),
            sigma: 1.0,
            n_grid: (5..=9).map(|e| 1 << e).collect(),
            trials: 50,
            ref_n: 1000,
        };
        let t = limit_distribution(&cfg, SeedSpec::from(7))?;
        let medians: Vec<String> = t.summaries.iter().map(|m| format!("{}:{:.3}", m.n, m.median)).collect();
        println!("s = {s}: medians {}  drift {:.2}  growth {:.2}", medians.join(" "), t.drift, t.growth);
    }
    Ok(())
}
