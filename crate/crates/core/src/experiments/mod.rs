//! Figure-level experiments and the artifact runner.
//!
//! [`run`] takes an [`ExperimentConfig`], dispatches on its `kind`, writes
//! CSV tables and SVG plots into an output directory and finishes with a
//! `manifest.json` that records the config hash, the seed, the runtime and a
//! SHA-256 checksum for every emitted file.
//!
//! Config files are JSON objects with a `seed` and a `kind` plus the fields of
//! the matching config struct:
//!
//! ```json
//! { "kind": "bound_curve", "seed": 7,
//!   "spec": { "dim": 1, "kind": "uniform_cube", "half_width": 1.0 },
//!   "sigmas": [0.5], "n_grid": [16, 32, 64], "mc": 100000 }
//! ```

pub mod curves;
pub mod stats;
pub mod svg;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use curves::{
    bound_curve, convergence_curve, default_ref_n, limit_distribution, BoundConfig, CellFailure, ConvergenceConfig,
    CurveRow, CurveStatistic, CurveTable, LimitConfig, LimitSample, LimitSummary, LimitTable, SlopeRow,
};

use crate::error::{Error, Result};
use crate::measures::DistributionSpec;
use crate::mswe::{error_experiment, error_experiment_with_data, ErrorRecord, ObjectiveConfig, OptConfig, ParamFamily};
use crate::rng::SeedSpec;
use crate::twosample::{rejection_curve, RejectionPoint, TestConfig};
use svg::{Figure, Series, Style};

pub const KINDS: [&str; 5] = [
    "convergence_curve",
    "bound_curve",
    "limit_distribution",
    "level_curve",
    "mswe_error",
];

pub fn usage() -> String {
    format!(
        "an experiment config is a JSON object with \"seed\" (integer), \"kind\" (one of: {}) \
         and the fields of that kind; see the README for the schema",
        KINDS.join(", ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurveConfig {
    pub spec_a: DistributionSpec,
    /// Defaults to `spec_a`, which gives the false-alarm curve.
    #[serde(default)]
    pub spec_b: Option<DistributionSpec>,
    pub m: usize,
    pub n: usize,
    pub test: TestConfig,
    pub alphas: Vec<f64>,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsweErrorConfig {
    pub family: ParamFamily,
    pub true_theta: Vec<f64>,
    /// Data distribution; defaults to the model at `true_theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DistributionSpec>,
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub opt: OptConfig,
    pub n_grid: Vec<usize>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    ConvergenceCurve(ConvergenceConfig),
    BoundCurve(BoundConfig),
    LimitDistribution(LimitConfig),
    LevelCurve(LevelCurveConfig),
    MsweError(MsweErrorConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ConvergenceCurve(_) => KINDS[0],
            Self::BoundCurve(_) => KINDS[1],
            Self::LimitDistribution(_) => KINDS[2],
            Self::LevelCurve(_) => KINDS[3],
            Self::MsweError(_) => KINDS[4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Used when the caller does not pass an output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some(k) if KINDS.contains(&k) => {}
            Some(k) => return Err(Error::Config(format!("unknown experiment kind {k:?}; {}", usage()))),
            None => return Err(Error::Config(format!("missing experiment kind; {}", usage()))),
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{e}; {}", usage())))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config_sha256: String,
    pub seed: u64,
    pub runtime_seconds: f64,
    pub outputs: Vec<OutputFile>,
    pub failures: Vec<String>,
    /// Kind-specific summary numbers (slopes, drift, ...).
    pub diagnostics: serde_json::Value,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    fn put(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        std::fs::write(self.dir.join(name), &bytes)?;
        self.files.push(OutputFile {
            file: name.into(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }
}

struct Report {
    failures: Vec<String>,
    diagnostics: serde_json::Value,
    total_failure: bool,
}

fn curve_outputs(out: &mut Outputs, stem: &str, table: &CurveTable, title: &str, y: &str) -> Result<Report> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    out.put(&format!("{stem}.csv"), buf)?;
    let mut buf = Vec::new();
    table.write_slopes_csv(&mut buf)?;
    out.put(&format!("{stem}_slopes.csv"), buf)?;
    out.put(&format!("{stem}.svg"), table.figure(title, y).to_svg().into_bytes())?;
    Ok(Report {
        failures: table
            .failures
            .iter()
            .map(|f| format!("sigma={} n={} trial={}: {}", f.sigma, f.n, f.trial, f.error))
            .collect(),
        diagnostics: serde_json::json!({ "slopes": table.slopes }),
        total_failure: table.rows.iter().all(|r| r.trials == 0),
    })
}

fn limit_outputs(out: &mut Outputs, t: &LimitTable) -> Result<Report> {
    let mut s = String::from("n,trial,value\n");
    for x in &t.samples {
        s.push_str(&format!("{},{},{}\n", x.n, x.trial, x.value));
    }
    out.put("limit_samples.csv", s.into_bytes())?;
    let mut s = String::from("n,median,bandwidth\n");
    for x in &t.summaries {
        s.push_str(&format!("{},{},{}\n", x.n, x.median, x.bandwidth));
    }
    out.put("limit_summary.csv", s.into_bytes())?;
    let mut s = String::from("n,x,density\n");
    for (n, x, d) in t.densities(200) {
        s.push_str(&format!("{n},{x},{d}\n"));
    }
    out.put("limit_density.csv", s.into_bytes())?;
    out.put("limit_density.svg", t.figure("Limit distribution").to_svg().into_bytes())?;
    Ok(Report {
        failures: Vec::new(),
        diagnostics: serde_json::json!({ "drift": t.drift, "growth": t.growth }),
        total_failure: false,
    })
}

fn level_outputs(out: &mut Outputs, points: &[RejectionPoint]) -> Result<Report> {
    let mut s = String::from("alpha,rejection_rate,repetitions\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.alpha, p.rejection_rate, p.repetitions));
    }
    out.put("level_curve.csv", s.into_bytes())?;
    let lo = points.iter().map(|p| p.alpha).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.alpha).fold(f64::NEG_INFINITY, f64::max);
    let fig = Figure {
        title: "Rejection rate".into(),
        x_label: "alpha".into(),
        y_label: "rejection rate".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                label: "empirical".into(),
                style: Style::Line,
                points: points.iter().map(|p| (p.alpha, p.rejection_rate, None)).collect(),
            },
            Series {
                label: "diagonal".into(),
                style: Style::Line,
                points: vec![(lo, lo, None), (hi, hi, None)],
            },
        ],
    };
    out.put("level_curve.svg", fig.to_svg().into_bytes())?;
    let max_dev = points.iter().map(|p| (p.rejection_rate - p.alpha).abs()).fold(0.0, f64::max);
    Ok(Report {
        failures: Vec::new(),
        diagnostics: serde_json::json!({ "max_abs_deviation": max_dev }),
        total_failure: false,
    })
}

fn mswe_outputs(out: &mut Outputs, records: &[ErrorRecord], n_grid: &[usize]) -> Result<Report> {
    let mut s = String::from("n,trial,coord,scaled_error\n");
    for r in records.iter().filter(|r| r.failure.is_none()) {
        for (c, e) in r.scaled_error.iter().enumerate() {
            s.push_str(&format!("{},{},{},{}\n", r.n, r.trial, c, e));
        }
    }
    out.put("mswe_errors.csv", s.into_bytes())?;
    let mut s = String::from("n,trial,theta_1,theta_2,objective_at_hat,objective_at_true,converged\n");
    for r in records.iter().filter(|r| r.failure.is_none()) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.trial, r.theta_hat[0], r.theta_hat[1], r.objective_at_hat, r.objective_at_true, r.converged
        ));
    }
    out.put("mswe_fits.csv", s.into_bytes())?;
    let fig = Figure {
        title: "Scaled estimation errors".into(),
        x_label: "sqrt(n) error, coordinate 1".into(),
        y_label: "sqrt(n) error, coordinate 2".into(),
        log_x: false,
        log_y: false,
        series: n_grid
            .iter()
            .map(|&n| Series {
                label: format!("n = {n}"),
                style: Style::Scatter,
                points: records
                    .iter()
                    .filter(|r| r.n == n && r.failure.is_none())
                    .map(|r| (r.scaled_error[0], r.scaled_error[1], None))
                    .collect(),
            })
            .collect(),
    };
    out.put("mswe_scatter.svg", fig.to_svg().into_bytes())?;
    let spread: Vec<serde_json::Value> = n_grid
        .iter()
        .map(|&n| {
            let ok: Vec<&ErrorRecord> = records.iter().filter(|r| r.n == n && r.failure.is_none()).collect();
            let sd: Vec<f64> = (0..2)
                .map(|c| stats::std_dev(&ok.iter().map(|r| r.scaled_error[c]).collect::<Vec<_>>()))
                .collect();
            serde_json::json!({ "n": n, "completed": ok.len(), "scaled_error_std": sd })
        })
        .collect();
    Ok(Report {
        failures: records
            .iter()
            .filter_map(|r| r.failure.as_ref().map(|f| format!("n={} trial={}: {}", r.n, r.trial, f)))
            .collect(),
        diagnostics: serde_json::json!({ "spread": spread }),
        total_failure: records.iter().all(|r| r.failure.is_some()),
    })
}

/// Runs the experiment and writes its artifacts into `out_dir` (or the
/// config's own `out_dir`). Fails only on invalid configs, I/O errors or
/// when every cell failed; partial failures are listed in the manifest.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Manifest> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| Error::Config("no output directory given".into()))?;
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let seed = SeedSpec::from(cfg.seed);
    let mut out = Outputs { dir, files: Vec::new() };
    let report = match &cfg.experiment {
        Experiment::ConvergenceCurve(c) => {
            let t = convergence_curve(c, seed)?;
            curve_outputs(&mut out, "convergence_curve", &t, "Empirical convergence", "mean distance")?
        }
        Experiment::BoundCurve(c) => {
            let t = bound_curve(c, seed)?;
            curve_outputs(&mut out, "bound_curve", &t, "Upper bound", "bound")?
        }
        Experiment::LimitDistribution(c) => limit_outputs(&mut out, &limit_distribution(c, seed)?)?,
        Experiment::LevelCurve(c) => {
            let b = c.spec_b.as_ref().unwrap_or(&c.spec_a);
            let pts = rejection_curve(&c.spec_a, b, c.m, c.n, &c.test, &c.alphas, c.repetitions, seed)?;
            level_outputs(&mut out, &pts)?
        }
        Experiment::MsweError(c) => {
            stats_check(&c.n_grid, c.trials)?;
            let recs = match &c.data {
                Some(d) => error_experiment_with_data(
                    d,
                    c.family,
                    &c.true_theta,
                    c.objective,
                    &c.opt,
                    &c.n_grid,
                    c.trials,
                    seed,
                )?,
                None => error_experiment(c.family, &c.true_theta, c.objective, &c.opt, &c.n_grid, c.trials, seed)?,
            };
            mswe_outputs(&mut out, &recs, &c.n_grid)?
        }
    };
    let manifest = Manifest {
        kind: cfg.experiment.kind().into(),
        config_sha256: cfg.hash()?,
        seed: cfg.seed,
        runtime_seconds: start.elapsed().as_secs_f64(),
        outputs: out.files,
        failures: report.failures,
        diagnostics: report.diagnostics,
    };
    std::fs::write(out.dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    if report.total_failure {
        return Err(Error::Config(format!(
            "every cell failed; first error: {}",
            manifest.failures.first().map(String::as_str).unwrap_or("unknown")
        )));
    }
    Ok(manifest)
}

fn stats_check(n_grid: &[usize], trials: usize) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n grid must be positive and strictly increasing".into()));
    }
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let cfg = ExperimentConfig::from_json(
            r#"{ "kind": "bound_curve", "seed": 7,
                 "spec": { "dim": 1, "kind": "uniform_cube", "half_width": 1.0 },
                 "sigmas": [0.5], "n_grid": [16, 32, 64], "mc": 100000 }"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.kind(), "bound_curve");
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn unknown_kind_mentions_usage() {
        let err = ExperimentConfig::from_json(r#"{ "kind": "figure_9", "seed": 1 }"#).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("figure_9") && msg.contains("convergence_curve")),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_fields_are_config_errors() {
        let err = ExperimentConfig::from_json(r#"{ "kind": "level_curve", "seed": 1 }"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
