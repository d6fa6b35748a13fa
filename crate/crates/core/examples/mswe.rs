//! Minimum smooth Wasserstein estimation for the two-mode and Gaussian families.
//!
//! Run with `cargo run --release --example mswe`.

use smooth_wasserstein::mswe::{error_experiment, fit, ObjectiveConfig, OptConfig, ParamFamily};
use smooth_wasserstein::{Result, SeedSpec};

fn main() -> Result<()> {
    let family = ParamFamily::TwoModeMeans;
    let data = family.distribution(&[-1.0, 1.0])?.sample(512, SeedSpec::from(1))?;
    let cfg = ObjectiveConfig::new(2.0, 0.5);
    let res = fit(&data, family, cfg, &OptConfig::default(), SeedSpec::from(2))?;
    println!(
        "theta_hat = {:?}, objective {:.4}, converged {}, {} trace entries",
        res.theta_hat,
        res.objective_value,
        res.converged,
        res.trace.len()
    );

    let g = ParamFamily::GaussianMeanScale;
    let data = g.distribution(&[0.5, 1.5])?.sample(2000, SeedSpec::from(3))?;
    let res = fit(&data, g, cfg, &OptConfig::default(), SeedSpec::from(4))?;
    println!("gaussian fit: mean {:.3}, scale {:.3}", res.theta_hat[0], res.theta_hat[1]);

    // scaled errors sqrt(n)(theta_hat - theta*) keep a stable spread across n
    let recs = error_experiment(family, &[-1.0, 1.0], cfg, &OptConfig::default(), &[64, 256], 8, SeedSpec::from(5))?;
    for n in [64, 256] {
        let errs: Vec<String> = recs
            .iter()
            .filter(|r| r.n == n)
            .map(|r| format!("({:+.2},{:+.2})", r.scaled_error[0], r.scaled_error[1]))
            .collect();
        println!("n = {n}: {}", errs.join(" "));
    }
    Ok(())
}
