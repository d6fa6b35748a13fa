//! Bootstrap two-sample tests and a small level/power curve.
//!
//! Run with `cargo run --release --example two_sample`.

use smooth_wasserstein::twosample::{rejection_curve, test, TestConfig, TestMode};
use smooth_wasserstein::{DistributionSpec, Result, SeedSpec};

fn main() -> Result<()> {
    let unit = DistributionSpec::uniform_box(1, 0.0, 1.0);
    let shifted = DistributionSpec::uniform_box(1, 0.3, 1.3);
    let a = unit.sample(128, SeedSpec::from(1))?;
    let b = shifted.sample(128, SeedSpec::from(2))?;

    let mut w1 = TestConfig::new(1.0, 0.1);
    w1.replicates = 300;
    let r = test(&a, &b, &w1, SeedSpec::from(3))?;
    println!("p=1: statistic {:.3}, critical value {:.3}, reject {}", r.statistic, r.critical_value, r.reject);

    let mut d2 = TestConfig::new(2.0, 1.0);
    d2.mode = TestMode::Mmd;
    let r = test(&a, &b, &d2, SeedSpec::from(4))?;
    println!("d2 mode: statistic {:.3}, critical value {:.3}, reject {}", r.statistic, r.critical_value, r.reject);

    let alphas = [0.05, 0.1, 0.2];
    w1.replicates = 200;
    for (name, other) in [("null", &unit), ("shift 0.3", &shifted)] {
        let pts = rejection_curve(&unit, other, 64, 64, &w1, &alphas, 40, SeedSpec::from(5))?;
        let rates: Vec<String> = pts.iter().map(|p| format!("{}:{:.2}", p.alpha, p.rejection_rate)).collect();
        println!("{name}: {}", rates.join("  "));
    }
    Ok(())
}
