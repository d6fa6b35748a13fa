//! Declarative distributions, seeded sampling, noise augmentation and CSV I/O.
//!
//! Run with `cargo run --example measures`.

use smooth_wasserstein::{DistributionSpec, EmpiricalMeasure, Result, SeedSpec};

fn main() -> Result<()> {
    let spec = DistributionSpec::mixture(vec![vec![-1.0], vec![1.0]], vec![1.0, 1.0], vec![0.5, 0.5]);
    println!("spec as JSON: {}", serde_json::to_string(&spec)?);

    // the same seed always gives the same sample; derive() opens independent streams
    let seed = SeedSpec::new(42, 0);
    let sample = spec.sample(1000, seed.derive(0))?;
    println!("mean {:?}, second moment {:.3}", sample.mean(), sample.second_moment());

    // convolution with N(0, sigma^2) approximated by k noise draws per point
    let smoothed = sample.augment(0.5, 8, seed.derive(1))?;
    println!("augmented size {} (second moment {:.3})", smoothed.len(), smoothed.second_moment());

    let mut buf = Vec::new();
    sample.select(&[0, 1, 2])?.write_csv(&mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    let back = EmpiricalMeasure::read_csv(buf.as_slice())?;
    println!("read back {} points", back.len());
    Ok(())
}
