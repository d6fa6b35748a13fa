use smooth_wasserstein::mswe::{error_experiment, fit, Objective, ObjectiveConfig, OptConfig, ParamFamily};
use smooth_wasserstein::{DistributionSpec, SeedSpec};

fn percentile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

#[test]
fn gaussian_fit_is_consistent() {
    let data = DistributionSpec::gaussian(vec![0.0], 1.0).sample(10_000, SeedSpec::from(50)).unwrap();
    let r = fit(
        &data,
        ParamFamily::GaussianMeanScale,
        ObjectiveConfig::new(2.0, 0.5),
        &OptConfig::default(),
        SeedSpec::from(51),
    )
    .unwrap();
    assert!(r.theta_hat[0].abs() <= 0.05, "{:?}", r.theta_hat);
    assert!((r.theta_hat[1] - 1.0).abs() <= 0.05, "{:?}", r.theta_hat);
}

#[test]
fn two_mode_fit_recovers_the_means() {
    let spec = ParamFamily::TwoModeMeans.distribution(&[-1.0, 1.0]).unwrap();
    let data = spec.sample(1024, SeedSpec::from(52)).unwrap();
    let r = fit(
        &data,
        ParamFamily::TwoModeMeans,
        ObjectiveConfig::new(2.0, 0.5),
        &OptConfig::default(),
        SeedSpec::from(53),
    )
    .unwrap();
    assert!(r.theta_hat[0] <= r.theta_hat[1]);
    assert!((r.theta_hat[0] + 1.0).abs() <= 0.15 && (r.theta_hat[1] - 1.0).abs() <= 0.15, "{:?}", r.theta_hat);
}

#[test]
fn objective_is_lipschitz_along_a_grid() {
    let data = DistributionSpec::gaussian(vec![0.0], 1.2).sample(200, SeedSpec::from(54)).unwrap();
    let obj = Objective::new(ParamFamily::TwoModeMeans, &data, ObjectiveConfig::new(2.0, 0.5), SeedSpec::from(55)).unwrap();
    let grid: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|a| obj.eval(&[*a, 0.8]).unwrap()).collect();
    // moving one mean by δ moves the model by at most δ in W_p
    let worst = vals
        .windows(2)
        .zip(grid.windows(2))
        .map(|(v, g)| (v[1] - v[0]).abs() / (g[1] - g[0]))
        .fold(0.0f64, f64::max);
    assert!(worst <= 1.0 + 1e-9, "{worst}");
}

#[test]
fn single_trial_experiment_is_reproducible() {
    let mut cfg = ObjectiveConfig::new(2.0, 0.5);
    cfg.k = 4;
    let run = || {
        error_experiment(ParamFamily::TwoModeMeans, &[-1.0, 1.0], cfg, &OptConfig::default(), &[64], 1, SeedSpec::from(56))
            .unwrap()
    };
    let a = run();
    assert_eq!(a.len(), 1);
    assert_eq!(a, run());
    assert!(a[0].failure.is_none());
    assert!(a[0].theta_hat[0] <= a[0].theta_hat[1]);
}

#[test]
fn objective_gap_decays_at_root_n() {
    let cfg = ObjectiveConfig::new(2.0, 0.5);
    let grid = [64usize, 256, 1024];
    let recs = error_experiment(
        ParamFamily::TwoModeMeans,
        &[-1.0, 1.0],
        cfg,
        &OptConfig::default(),
        &grid,
        20,
        SeedSpec::from(57),
    )
    .unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &grid {
        let gaps: Vec<f64> = recs
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.objective_at_true - r.objective_at_hat).abs())
            .collect();
        xs.push((n as f64).ln());
        ys.push((gaps.iter().sum::<f64>() / gaps.len() as f64).ln());
    }
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

#[test]
fn generalization_gap_concentrates() {
    let family = ParamFamily::GaussianMeanScale;
    let mut cfg = ObjectiveConfig::new(2.0, 0.5);
    cfg.k = 4;
    let spec = DistributionSpec::gaussian(vec![0.0], 1.0);
    let theta_grid: Vec<[f64; 2]> = (0..=20)
        .flat_map(|i| (0..=16).map(move |j| [-0.5 + 0.05 * i as f64, 0.6 + 0.05 * j as f64]))
        .collect();
    let gaps = |n: usize| -> Vec<f64> {
        (0..100u64)
            .map(|t| {
                let s = SeedSpec::new(58, n as u64 * 1000 + t);
                let data = spec.sample(n, s.derive(0)).unwrap();
                let r = fit(&data, family, cfg, &OptConfig::default(), s.derive(1)).unwrap();
                let fresh = spec.sample(n, s.derive(2)).unwrap();
                let obj = Objective::new(family, &fresh, cfg, s.derive(3)).unwrap();
                let best = theta_grid
                    .iter()
                    .map(|th| obj.eval(th).unwrap())
                    .fold(f64::INFINITY, f64::min);
                obj.eval(&r.theta_hat).unwrap() - best
            })
            .collect()
    };
    let q64 = percentile(gaps(64), 0.95);
    let q256 = percentile(gaps(256), 0.95);
    let scaled = q64 * (64.0f64 / 256.0).sqrt();
    assert!(q256 <= 2.0 * scaled, "q256 {q256} vs scaled q64 {scaled}");
}
