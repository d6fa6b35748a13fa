use smooth_wasserstein::experiments::{
    bound_curve, convergence_curve, run, BoundConfig, ConvergenceConfig, CurveStatistic, Experiment, ExperimentConfig,
};
use smooth_wasserstein::ot::OtMethod;
use smooth_wasserstein::{DistributionSpec, Error, SeedSpec};
use std::collections::BTreeSet;

fn curve(sigmas: Vec<f64>, n_grid: Vec<usize>, trials: usize, ref_n: Option<usize>) -> ConvergenceConfig {
    ConvergenceConfig {
        spec: DistributionSpec::uniform_cube(1, 1.0),
        sigmas,
        n_grid,
        trials,
        statistic: CurveStatistic::SmoothWasserstein,
        p: 2.0,
        method: OtMethod::ExactLp,
        k: 16,
        ref_k: 1,
        ref_n,
    }
}

fn configs() -> Vec<ExperimentConfig> {
    let texts = [
        r#"{"kind":"convergence_curve","seed":1,"spec":{"dim":2,"kind":"uniform_cube","half_width":1.0},
            "sigmas":[0.0,0.5],"n_grid":[8,16],"trials":3,"k":2,"ref_n":200}"#,
        r#"{"kind":"bound_curve","seed":2,"spec":{"dim":1,"kind":"uniform_cube","half_width":1.0},
            "sigmas":[0.5,1.0],"n_grid":[16,32],"mc":20000}"#,
        r#"{"kind":"limit_distribution","seed":3,"spec":{"dim":2,"kind":"gaussian","mean":[0,0],"scale":0.3},
            "sigma":1.0,"n_grid":[8,16],"trials":5,"ref_n":100}"#,
        r#"{"kind":"level_curve","seed":4,"spec_a":{"dim":1,"kind":"uniform_cube","half_width":0.5},
            "m":24,"n":24,"test":{"p":2.0,"sigma":1.0,"replicates":100,"mode":"mmd"},
            "alphas":[0.1,0.2],"repetitions":10}"#,
        r#"{"kind":"mswe_error","seed":5,"family":"two_mode_means","true_theta":[-1.0,1.0],
            "objective":{"p":2.0,"sigma":0.5,"k":2},"n_grid":[16,32],"trials":2}"#,
    ];
    texts.iter().map(|t| ExperimentConfig::from_json(t).unwrap()).collect()
}

#[test]
fn reruns_reproduce_every_checksum() {
    for cfg in configs() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = run(&cfg, Some(a.path())).unwrap();
        let mb = run(&cfg, Some(b.path())).unwrap();
        assert_eq!(ma.outputs, mb.outputs, "{}", ma.kind);
        assert_eq!(ma.config_sha256, mb.config_sha256);
    }
}

#[test]
fn manifest_lists_every_emitted_file() {
    for cfg in configs() {
        let dir = tempfile::tempdir().unwrap();
        let m = run(&cfg, Some(dir.path())).unwrap();
        let on_disk: BTreeSet<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|f| f != "manifest.json")
            .collect();
        let listed: BTreeSet<String> = m.outputs.iter().map(|o| o.file.clone()).collect();
        assert_eq!(on_disk, listed, "{}", m.kind);
        let written: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(written["outputs"].as_array().unwrap().len(), m.outputs.len());
        assert!(m.outputs.iter().any(|o| o.file.ends_with(".svg")));
    }
}

#[test]
fn unknown_kind_is_a_config_error() {
    let err = ExperimentConfig::from_json(r#"{"kind":"histogram","seed":0}"#).unwrap_err();
    assert!(matches!(err, Error::Config(ref m) if m.contains("mswe_error")), "{err}");
}

#[test]
fn total_failure_is_reported_after_writing_the_manifest() {
    let mut c = curve(vec![0.0], vec![8, 16], 2, Some(200));
    c.spec = DistributionSpec::uniform_cube(2, 1.0);
    c.method = OtMethod::Sinkhorn {
        epsilon: Some(1e-4),
        max_iter: 1,
        tol: 1e-12,
    };
    let cfg = ExperimentConfig {
        seed: 9,
        out_dir: None,
        experiment: Experiment::ConvergenceCurve(c),
    };
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&cfg, Some(dir.path())).is_err());
    let written: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(written["failures"].as_array().unwrap().len(), 4);
}

#[test]
fn one_dimensional_smooth_curve_has_root_n_slope() {
    let c = curve(vec![1.0], (4..=10).map(|e| 1 << e).collect(), 20, Some(100_000));
    let t = convergence_curve(&c, SeedSpec::from(70)).unwrap();
    let slope = t.slope_for(1.0).unwrap();
    assert!((slope + 0.5).abs() <= 0.1, "{slope}");
}

#[test]
fn means_do_not_increase_with_sigma() {
    // the noise-sampling floor grows with sigma, so both sides need many noise draws
    let mut c = curve(vec![0.0, 0.25, 0.5, 1.0, 2.0], vec![64], 30, Some(200_000));
    c.k = 2048;
    let t = convergence_curve(&c, SeedSpec::from(71)).unwrap();
    for w in t.rows.windows(2) {
        let slack = 3.0 * w[0].std_error.hypot(w[1].std_error);
        assert!(w[1].mean_value <= w[0].mean_value + slack, "{:?}", w);
    }
}

#[test]
fn doubling_the_reference_moves_means_by_less_than_one_se() {
    let run = |ref_n| {
        convergence_curve(&curve(vec![0.5], vec![16], 20, Some(ref_n)), SeedSpec::from(72))
            .unwrap()
            .rows[0]
    };
    let (a, b) = (run(10_000), run(20_000));
    assert!((a.mean_value - b.mean_value).abs() < a.std_error, "{a:?} vs {b:?}");
}

#[test]
fn bound_sits_above_the_measured_curve() {
    let spec = DistributionSpec::uniform_cube(1, 1.0);
    let n_grid = vec![16, 64, 256];
    let measured = convergence_curve(&curve(vec![0.5], n_grid.clone(), 10, None), SeedSpec::from(73)).unwrap();
    let bound = bound_curve(
        &BoundConfig {
            spec,
            sigmas: vec![0.5],
            n_grid,
            mc: 100_000,
        },
        SeedSpec::from(74),
    )
    .unwrap();
    for (b, m) in bound.rows.iter().zip(&measured.rows) {
        assert_eq!(b.n, m.n);
        assert!(b.mean_value >= m.mean_value, "{b:?} vs {m:?}");
    }
    let r = bound.rows[0].mean_value / bound.rows[1].mean_value;
    assert!((r - 2.0).abs() < 1e-12);
}
