//! Convergence curves, the closed-form bound curve and limit-distribution samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use super::stats::{kde, linspace, loglog_slope, mean_and_se, median, silverman_bandwidth, SlopeFit};
use super::svg::{Figure, Series, Style};
use crate::error::{Error, Result};
use crate::measures::{DistributionSpec, EmpiricalMeasure};
use crate::mmd::{gw_upper_bound, kernel_expectations, MmdReference};
use crate::ot::{distance, OtConfig, OtMethod, DEFAULT_NOISE_REPLICAS};
use crate::rng::SeedSpec;
use crate::specialfn::KernelParams;

const REFERENCE_STREAM: u64 = 0;
const CELL_STREAM: u64 = 1;

/// Which one-sample discrepancy a convergence curve tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurveStatistic {
    /// `GW_p(μ̂_n, μ)` via noise augmentation and OT (plain `W_p` at σ = 0).
    #[default]
    SmoothWasserstein,
    /// `d₂^(σ)(μ̂_n, μ)` via the kernel V-statistic.
    Mmd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub spec: DistributionSpec,
    pub sigmas: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub statistic: CurveStatistic,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Solver for `d > 1`; one-dimensional problems always use quantiles.
    #[serde(default)]
    pub method: OtMethod,
    /// Noise replicas per sample point.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Noise replicas per reference point.
    #[serde(default = "default_ref_k")]
    pub ref_k: usize,
    /// Reference size; see [`default_ref_n`].
    #[serde(default)]
    pub ref_n: Option<usize>,
}

fn default_p() -> f64 {
    2.0
}

fn default_k() -> usize {
    DEFAULT_NOISE_REPLICAS
}

fn default_ref_k() -> usize {
    1
}

/// `10⁴` for `d ≤ 2`, otherwise `10³·max(n)` capped at `10⁵`.
pub fn default_ref_n(dim: usize, max_n: usize) -> usize {
    if dim <= 2 {
        10_000
    } else {
        (1000 * max_n).min(100_000)
    }
}

fn check_grid(n_grid: &[usize], trials: usize) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n grid must be positive and strictly increasing".into()));
    }
    if trials < 2 {
        return Err(Error::Config("need at least two trials".into()));
    }
    Ok(())
}

impl ConvergenceConfig {
    pub fn ref_n(&self) -> usize {
        self.ref_n
            .unwrap_or_else(|| default_ref_n(self.spec.dim, *self.n_grid.last().unwrap_or(&1)))
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        check_grid(&self.n_grid, self.trials)?;
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config("sigmas must be a non-empty list of values >= 0".into()));
        }
        if self.statistic == CurveStatistic::Mmd && self.sigmas.contains(&0.0) {
            return Err(Error::Config("the MMD statistic needs sigma > 0".into()));
        }
        if self.k == 0 || self.ref_k == 0 {
            return Err(Error::Config("noise replica counts must be positive".into()));
        }
        let max_n = *self.n_grid.last().unwrap();
        if self.ref_n() < 10 * max_n {
            return Err(Error::Config(format!(
                "reference size {} is below 10·max(n) = {}",
                self.ref_n(),
                10 * max_n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub sigma: f64,
    pub n: usize,
    pub mean_value: f64,
    pub std_error: f64,
    /// Completed trials (or Monte Carlo draws for the bound curve).
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub sigma: f64,
    #[serde(flatten)]
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub sigma: f64,
    pub n: usize,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Log-log slope per σ over the largest half of the n grid.
    pub slopes: Vec<SlopeRow>,
    pub failures: Vec<CellFailure>,
}

impl CurveTable {
    fn from_rows(rows: Vec<CurveRow>, failures: Vec<CellFailure>) -> Self {
        let mut sigmas: Vec<f64> = Vec::new();
        for r in &rows {
            if !sigmas.contains(&r.sigma) {
                sigmas.push(r.sigma);
            }
        }
        let slopes = sigmas
            .iter()
            .filter_map(|&s| {
                let sel: Vec<&CurveRow> = rows.iter().filter(|r| r.sigma == s && r.trials > 0).collect();
                let tail = &sel[sel.len() / 2..];
                let ns: Vec<usize> = tail.iter().map(|r| r.n).collect();
                let means: Vec<f64> = tail.iter().map(|r| r.mean_value).collect();
                let ses: Vec<f64> = tail.iter().map(|r| r.std_error).collect();
                loglog_slope(&ns, &means, &ses).map(|fit| SlopeRow { sigma: s, fit })
            })
            .collect();
        Self { rows, slopes, failures }
    }

    pub fn rows_for(&self, sigma: f64) -> impl Iterator<Item = &CurveRow> {
        self.rows.iter().filter(move |r| r.sigma == sigma)
    }

    pub fn slope_for(&self, sigma: f64) -> Option<f64> {
        self.slopes.iter().find(|s| s.sigma == sigma).map(|s| s.fit.slope)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "sigma,n,mean_value,std_error,trials")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.sigma, r.n, r.mean_value, r.std_error, r.trials)?;
        }
        Ok(())
    }

    pub fn write_slopes_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "sigma,slope,slope_se,intercept,points")?;
        for s in &self.slopes {
            writeln!(w, "{},{},{},{},{}", s.sigma, s.fit.slope, s.fit.slope_se, s.fit.intercept, s.fit.points)?;
        }
        Ok(())
    }

    pub fn figure(&self, title: &str, y_label: &str) -> Figure {
        let mut sigmas: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !sigmas.contains(&r.sigma) {
                sigmas.push(r.sigma);
            }
        }
        Figure {
            title: title.into(),
            x_label: "n".into(),
            y_label: y_label.into(),
            log_x: true,
            log_y: true,
            series: sigmas
                .iter()
                .map(|&s| Series {
                    label: format!("sigma = {s}"),
                    style: Style::Line,
                    points: self
                        .rows_for(s)
                        .filter(|r| r.trials > 0)
                        .map(|r| (r.n as f64, r.mean_value, r.std_error.is_finite().then_some(r.std_error)))
                        .collect(),
                })
                .collect(),
        }
    }
}

fn summarize(
    keys: &[(usize, usize)],
    sigmas: &[f64],
    n_grid: &[usize],
    results: Vec<((usize, usize, usize), Result<f64>)>,
) -> CurveTable {
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &(si, ni) in keys {
        let vals: Vec<f64> = results
            .iter()
            .filter(|((s, n, _), _)| *s == si && *n == ni)
            .filter_map(|(_, r)| r.as_ref().ok().copied())
            .collect();
        let (mean_value, std_error) = mean_and_se(&vals).unwrap_or((f64::NAN, f64::NAN));
        rows.push(CurveRow {
            sigma: sigmas[si],
            n: n_grid[ni],
            mean_value,
            std_error,
            trials: vals.len(),
        });
    }
    for ((si, ni, t), r) in results {
        if let Err(e) = r {
            failures.push(CellFailure {
                sigma: sigmas[si],
                n: n_grid[ni],
                trial: t,
                error: e.to_string(),
            });
        }
    }
    CurveTable::from_rows(rows, failures)
}

enum Reference {
    Augmented(EmpiricalMeasure),
    Kernel(MmdReference),
}

/// Mean one-sample discrepancy to `μ` (proxied by a seeded reference sample)
/// for every `(σ, n)`, over `trials` independent samples.
pub fn convergence_curve(cfg: &ConvergenceConfig, seed: SeedSpec) -> Result<CurveTable> {
    cfg.validate()?;
    let ot = OtConfig::new(cfg.p, cfg.method);
    let reference = cfg.spec.sample(cfg.ref_n(), seed.derive(REFERENCE_STREAM))?;
    let references: Vec<Reference> = cfg
        .sigmas
        .iter()
        .enumerate()
        .map(|(si, &sigma)| match cfg.statistic {
            CurveStatistic::SmoothWasserstein if sigma == 0.0 => Ok(Reference::Augmented(reference.clone())),
            CurveStatistic::SmoothWasserstein => Ok(Reference::Augmented(reference.augment(
                sigma,
                cfg.ref_k,
                seed.derive(REFERENCE_STREAM).derive(1 + si as u64),
            )?)),
            CurveStatistic::Mmd => Ok(Reference::Kernel(MmdReference::new(
                reference.clone(),
                KernelParams::new(sigma)?,
            )?)),
        })
        .collect::<Result<_>>()?;

    let keys: Vec<(usize, usize)> = (0..cfg.sigmas.len())
        .flat_map(|s| (0..cfg.n_grid.len()).map(move |n| (s, n)))
        .collect();
    let cells: Vec<(usize, usize, usize)> = keys
        .iter()
        .flat_map(|&(s, n)| (0..cfg.trials).map(move |t| (s, n, t)))
        .collect();
    let results: Vec<((usize, usize, usize), Result<f64>)> = cells
        .into_par_iter()
        .map(|(si, ni, t)| {
            let sigma = cfg.sigmas[si];
            let n = cfg.n_grid[ni];
            // the sample depends on (n, trial) only, so every σ sees the same data
            let cs = seed.derive(CELL_STREAM).derive(n as u64).derive(t as u64);
            let value = (|| {
                let sample = cfg.spec.sample(n, cs.derive(0))?;
                match &references[si] {
                    Reference::Augmented(r) if sigma == 0.0 => distance(&sample, r, &ot),
                    Reference::Augmented(r) => {
                        let aug = sample.augment(sigma, cfg.k, cs.derive(1 + si as u64))?;
                        distance(&aug, r, &ot)
                    }
                    Reference::Kernel(r) => Ok(r.d2_squared(&sample)?.d2),
                }
            })();
            ((si, ni, t), value)
        })
        .collect();
    Ok(summarize(&keys, &cfg.sigmas, &cfg.n_grid, results))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub spec: DistributionSpec,
    pub sigmas: Vec<f64>,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_mc")]
    pub mc: usize,
}

fn default_mc() -> usize {
    1_000_000
}

/// `2·exp(E|X|²/(4σ²))·√((E κ(X,X) − E κ(X,X'))/n)` for the centered law.
///
/// `GW₂` is translation invariant, so the bound for the centered law also
/// holds for the original one. Standard errors follow from the delta method.
pub fn bound_curve(cfg: &BoundConfig, seed: SeedSpec) -> Result<CurveTable> {
    cfg.spec.validate()?;
    check_grid(&cfg.n_grid, 2)?;
    if cfg.sigmas.is_empty() || cfg.sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::Config("bound curve needs positive sigmas".into()));
    }
    let centered = cfg.spec.centered();
    let m2 = centered.second_moment();
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        let e = kernel_expectations(&centered, KernelParams::new(sigma)?, cfg.mc, seed.derive(si as u64))?;
        let diff = e.difference.max(0.0);
        for &n in &cfg.n_grid {
            let d = (diff / n as f64).sqrt();
            let bound = gw_upper_bound(d, m2, 2.0, sigma)?;
            let se = if diff > 0.0 {
                bound * e.difference_se / (2.0 * diff)
            } else {
                0.0
            };
            rows.push(CurveRow {
                sigma,
                n,
                mean_value: bound,
                std_error: se,
                trials: e.samples,
            });
        }
    }
    Ok(CurveTable::from_rows(rows, Vec::new()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub spec: DistributionSpec,
    pub sigma: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_limit_ref_n")]
    pub ref_n: usize,
}

fn default_limit_ref_n() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub n: usize,
    pub trial: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub n: usize,
    pub median: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub samples: Vec<LimitSample>,
    pub summaries: Vec<LimitSummary>,
    /// `(max median − min median) / min median` across the grid.
    pub drift: f64,
    /// `median(last n) / median(first n) − 1`.
    pub growth: f64,
}

impl LimitTable {
    pub fn values_for(&self, n: usize) -> Vec<f64> {
        self.samples.iter().filter(|s| s.n == n).map(|s| s.value).collect()
    }

    /// Kernel density of each sample set on a common grid: `(n, x, density)`.
    pub fn densities(&self, points: usize) -> Vec<(usize, f64, f64)> {
        let lo = self.samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        let pad = self.summaries.iter().map(|s| 3.0 * s.bandwidth).fold(0.0, f64::max);
        let grid = linspace(lo - pad, hi + pad, points);
        let mut out = Vec::new();
        for s in &self.summaries {
            let dens = kde(&self.values_for(s.n), s.bandwidth, &grid);
            out.extend(grid.iter().zip(dens).map(|(x, d)| (s.n, *x, d)));
        }
        out
    }

    pub fn figure(&self, title: &str) -> Figure {
        let dens = self.densities(200);
        Figure {
            title: title.into(),
            x_label: "sqrt(n) d2".into(),
            y_label: "density".into(),
            log_x: false,
            log_y: false,
            series: self
                .summaries
                .iter()
                .map(|s| Series {
                    label: format!("n = {}", s.n),
                    style: Style::Line,
                    points: dens.iter().filter(|d| d.0 == s.n).map(|d| (d.1, d.2, None)).collect(),
                })
                .collect(),
        }
    }
}

/// Samples of `√n·d₂^(σ)(μ̂_n, μ̂_ref)` with a fixed reference of size `ref_n`.
pub fn limit_distribution(cfg: &LimitConfig, seed: SeedSpec) -> Result<LimitTable> {
    cfg.spec.validate()?;
    check_grid(&cfg.n_grid, cfg.trials)?;
    if cfg.ref_n == 0 {
        return Err(Error::Config("reference size must be positive".into()));
    }
    let params = KernelParams::new(cfg.sigma)?;
    let reference = MmdReference::new(cfg.spec.sample(cfg.ref_n, seed.derive(REFERENCE_STREAM))?, params)?;
    let cells: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let samples: Vec<LimitSample> = cells
        .into_par_iter()
        .map(|(n, trial)| {
            let cs = seed.derive(CELL_STREAM).derive(n as u64).derive(trial as u64);
            let sample = cfg.spec.sample(n, cs)?;
            let d2 = reference.d2_squared(&sample)?.d2;
            Ok(LimitSample {
                n,
                trial,
                value: (n as f64).sqrt() * d2,
            })
        })
        .collect::<Result<_>>()?;
    let summaries: Vec<LimitSummary> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let v: Vec<f64> = samples.iter().filter(|s| s.n == n).map(|s| s.value).collect();
            LimitSummary {
                n,
                median: median(&v),
                bandwidth: silverman_bandwidth(&v),
            }
        })
        .collect();
    let meds: Vec<f64> = summaries.iter().map(|s| s.median).collect();
    let lo = meds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = meds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LimitTable {
        drift: (hi - lo) / lo,
        growth: meds[meds.len() - 1] / meds[0] - 1.0,
        samples,
        summaries,
    })
}
