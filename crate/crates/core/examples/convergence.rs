//! Empirical convergence curves, their log-log slopes and the closed-form bound.
//! Writes `convergence.svg` into the working directory.
//!
//! Run with `cargo run --release --example convergence`.

use smooth_wasserstein::experiments::{bound_curve, convergence_curve, BoundConfig, ConvergenceConfig, CurveStatistic};
use smooth_wasserstein::ot::OtMethod;
use smooth_wasserstein::{DistributionSpec, Result, SeedSpec};

fn main() -> Result<()> {
    let spec = DistributionSpec::uniform_cube(1, 1.0);
    let n_grid: Vec<usize> = (4..=9).map(|e| 1 << e).collect();
    let cfg = ConvergenceConfig {
        spec: spec.clone(),
        sigmas: vec![0.0, 0.5, 1.0],
        n_grid: n_grid.clone(),
        trials: 10,
        statistic: CurveStatistic::SmoothWasserstein,
        p: 2.0,
        method: OtMethod::ExactLp,
        k: 16,
        ref_k: 1,
        // the default 1e4-point reference dominates the error at n = 512 in d = 1
        ref_n: Some(100_000),
    };
    let curve = convergence_curve(&cfg, SeedSpec::from(1))?;
    for r in &curve.rows {
        println!("sigma {:<4} n {:>4}: {:.4} +- {:.4}", r.sigma, r.n, r.mean_value, r.std_error);
    }
    for s in &curve.slopes {
        println!("sigma {}: slope {:.3}", s.sigma, s.fit.slope);
    }

    let bound = bound_curve(&BoundConfig { spec, sigmas: vec![0.5], n_grid, mc: 200_000 }, SeedSpec::from(2))?;
    for (b, c) in bound.rows.iter().zip(curve.rows_for(0.5)) {
        println!("n {:>4}: bound {:.4} vs measured {:.4}", b.n, b.mean_value, c.mean_value);
    }
    std::fs::write("convergence.svg", curve.figure("Empirical convergence", "mean GW_2").to_svg())?;
    Ok(())
}
