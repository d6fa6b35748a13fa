//! Exact, entropic and one-dimensional transport, with and without smoothing.
//!
//! Run with `cargo run --example distances`.

use smooth_wasserstein::ot::{distance, smooth_wasserstein, wasserstein_discrete, OtConfig, OtMethod};
use smooth_wasserstein::{DistributionSpec, Result, SeedSpec};

fn main() -> Result<()> {
    let a = DistributionSpec::uniform_cube(2, 1.0).sample(60, SeedSpec::from(1))?;
    let b = DistributionSpec::gaussian(vec![0.5, 0.0], 0.6).sample(40, SeedSpec::from(2))?;

    let exact = wasserstein_discrete(&a, &b, &OtConfig::exact(2.0))?;
    println!("exact W2 = {:.6} (plan {}x{})", exact.distance(), exact.plan.rows(), exact.plan.cols());
    let entropic = distance(&a, &b, &OtConfig::new(2.0, OtMethod::sinkhorn(None)))?;
    println!("sinkhorn W2 = {entropic:.6}");

    // estimates carry a noise-sampling error that grows with sigma and shrinks with k
    for sigma in [0.0, 0.25, 0.5, 1.0] {
        let v = smooth_wasserstein(&a, &b, sigma, &OtConfig::exact(2.0), 8, SeedSpec::from(3))?;
        println!("smooth W2 at sigma {sigma}: {v:.4}");
    }

    // one dimension always uses the quantile formula
    let x = DistributionSpec::uniform_cube(1, 1.0).sample(5000, SeedSpec::from(4))?;
    let y = DistributionSpec::uniform_box(1, -0.5, 1.5).sample(5000, SeedSpec::from(5))?;
    println!("1-D W1 = {:.4} (population value 0.5)", distance(&x, &y, &OtConfig::exact(1.0))?);
    Ok(())
}
