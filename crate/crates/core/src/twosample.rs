//! Bootstrap-calibrated two-sample tests built on smooth distances.
//!
//! For `p = 2` the critical value comes from the `d₂` bootstrap: replicates are
//! drawn from the pooled sample, centered at the pooled mean, and scaled by
//! `p·exp(tr Σ̂/(2qσ²))·√(mn/N)`. For `p = 1` the replicates are smooth `W₁`
//! distances between uncentered resamples.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::measures::{DistributionSpec, EmpiricalMeasure};
use crate::ot::{smooth_wasserstein_with, NoiseCoupling, OtConfig, DEFAULT_NOISE_REPLICAS};
use crate::rng::SeedSpec;
use crate::specialfn::{gram, KernelParams};

const STATISTIC_STREAM: u64 = 0;
const BOOTSTRAP_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    /// Statistic from the smooth Wasserstein estimate, calibrated by the `d₂`
    /// bootstrap when `p = 2`.
    #[default]
    SmoothWasserstein,
    /// `d₂` statistic on both sides (`p = 2` only).
    Mmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub p: f64,
    pub sigma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Solver for smooth Wasserstein evaluations; its `p` is overridden by `self.p`.
    #[serde(default = "default_ot")]
    pub ot: OtConfig,
    #[serde(default)]
    pub mode: TestMode,
    #[serde(default)]
    pub noise: NoiseCoupling,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_replicates() -> usize {
    500
}

fn default_k() -> usize {
    DEFAULT_NOISE_REPLICAS
}

fn default_ot() -> OtConfig {
    OtConfig::exact(1.0)
}

impl TestConfig {
    pub fn new(p: f64, sigma: f64) -> Self {
        Self {
            p,
            sigma,
            alpha: default_alpha(),
            replicates: default_replicates(),
            k: default_k(),
            ot: OtConfig::exact(p),
            mode: TestMode::default(),
            noise: NoiseCoupling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p != 1.0 && self.p != 2.0 {
            return Err(Error::Config(format!(
                "two-sample tests support p = 1 or p = 2, got {}",
                self.p
            )));
        }
        if self.mode == TestMode::Mmd && self.p != 2.0 {
            return Err(Error::Config("the MMD mode requires p = 2".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.replicates < 100 {
            return Err(Error::Config(format!(
                "need at least 100 bootstrap replicates, got {}",
                self.replicates
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }

    fn ot(&self) -> OtConfig {
        OtConfig { p: self.p, ..self.ot }
    }

    /// `q = p/(p−1)`; only meaningful for `p > 1`.
    fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    /// Sorted ascending.
    pub bootstrap_values: Vec<f64>,
}

impl TestResult {
    /// Decision at another level, reusing the same replicates.
    pub fn reject_at(&self, alpha: f64) -> bool {
        self.statistic > order_statistic(&self.bootstrap_values, alpha)
    }
}

/// The `⌈(1−α)B⌉`-th smallest of the sorted values.
pub fn order_statistic(sorted: &[f64], alpha: f64) -> f64 {
    let b = sorted.len();
    // guard against (1−α)·B landing just above an integer through rounding
    let rank = (((1.0 - alpha) * b as f64) - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, b) - 1]
}

fn check_inputs(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &TestConfig) -> Result<()> {
    cfg.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("each sample needs at least two points".into()));
    }
    Ok(())
}

/// `√(mn/N)` with `N = m + n`.
pub fn size_factor(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (m * n / (m + n)).sqrt()
}

/// Pooled sample centered at its mean, with the kernel Gram matrix.
struct PooledGram {
    gram: Matrix,
    /// `p·exp(tr Σ̂/(2qσ²))`
    constant: f64,
}

impl PooledGram {
    fn new(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &TestConfig) -> Result<Self> {
        let pooled = a.pool(b)?;
        let constant = comparison_constant(&pooled, cfg)?;
        let centered = pooled.center(&pooled.mean())?;
        let rows: Vec<&[f64]> = centered.points().collect();
        let gram = gram(&rows, KernelParams::new(cfg.sigma)?)?;
        Ok(Self { gram, constant })
    }

    /// `d₂` between two weightings of the pooled points.
    fn d2(&self, signed: &[f64]) -> f64 {
        self.gram.quadratic_form(signed).max(0.0).sqrt()
    }
}

/// The factor `p·exp(tr Σ̂_Z/(2qσ²))` applied to bootstrap `d₂` values.
pub fn comparison_constant(pooled: &EmpiricalMeasure, cfg: &TestConfig) -> Result<f64> {
    let exponent = pooled.cov_trace() / (2.0 * cfg.conjugate() * cfg.sigma * cfg.sigma);
    if exponent > 709.0 {
        return Err(Error::Overflow(format!("comparison exponent {exponent} too large")));
    }
    Ok(cfg.p * exponent.exp())
}

/// `W_{m,n} = √(mn/N)·GW_p(μ̂_m, ν̂_n)`, or its `d₂` counterpart in MMD mode.
pub fn statistic(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &TestConfig, seed: SeedSpec) -> Result<f64> {
    check_inputs(a, b, cfg)?;
    match cfg.mode {
        TestMode::SmoothWasserstein => smooth_statistic(a, b, cfg, seed.derive(STATISTIC_STREAM)),
        TestMode::Mmd => {
            let pg = PooledGram::new(a, b, cfg)?;
            Ok(mmd_statistic(&pg, a, b))
        }
    }
}

fn smooth_statistic(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &TestConfig, seed: SeedSpec) -> Result<f64> {
    let w = smooth_wasserstein_with(a, b, cfg.sigma, &cfg.ot(), cfg.k, seed, cfg.noise)?;
    Ok(size_factor(a.len(), b.len()) * w)
}

fn mmd_statistic(pg: &PooledGram, a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let signed: Vec<f64> = a
        .weights()
        .iter()
        .copied()
        .chain(b.weights().iter().map(|w| -w))
        .collect();
    pg.constant * size_factor(a.len(), b.len()) * pg.d2(&signed)
}

/// Bootstrap critical value at `cfg.alpha` and the sorted replicate values.
pub fn bootstrap_critical_value(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    cfg: &TestConfig,
    seed: SeedSpec,
) -> Result<(f64, Vec<f64>)> {
    check_inputs(a, b, cfg)?;
    let values = bootstrap_values(a, b, cfg, seed.derive(BOOTSTRAP_STREAM), None)?;
    Ok((order_statistic(&values, cfg.alpha), values))
}

fn bootstrap_values(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    cfg: &TestConfig,
    seed: SeedSpec,
    pooled_gram: Option<&PooledGram>,
) -> Result<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let scale = size_factor(m, n);
    let pooled = a.pool(b)?;
    let sampler = WeightedIndex::new(pooled.weights())
        .map_err(|e| Error::InvalidInput(format!("pooled weights: {e}")))?;
    let owned;
    let pg = if cfg.p == 2.0 {
        match pooled_gram {
            Some(pg) => Some(pg),
            None => {
                owned = PooledGram::new(a, b, cfg)?;
                Some(&owned)
            }
        }
    } else {
        None
    };

    let mut values: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let rs = seed.derive(r as u64);
            let mut rng = rs.derive(0).rng();
            let ia: Vec<usize> = (0..m).map(|_| sampler.sample(&mut rng)).collect();
            let ib: Vec<usize> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
            match pg {
                Some(pg) => {
                    let mut signed = vec![0.0; m + n];
                    for &i in &ia {
                        signed[i] += 1.0 / m as f64;
                    }
                    for &i in &ib {
                        signed[i] -= 1.0 / n as f64;
                    }
                    Ok(pg.constant * scale * pg.d2(&signed))
                }
                None => {
                    let ra = pooled.select(&ia)?;
                    let rb = pooled.select(&ib)?;
                    smooth_statistic(&ra, &rb, cfg, rs.derive(1)).map_err(|e| {
                        Error::SolverFailure(format!("bootstrap replicate {r} failed: {e}"))
                    })
                }
            }
        })
        .collect::<Result<_>>()?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Run the full test: statistic, bootstrap calibration and decision.
pub fn test(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &TestConfig, seed: SeedSpec) -> Result<TestResult> {
    check_inputs(a, b, cfg)?;
    let pg = if cfg.p == 2.0 {
        Some(PooledGram::new(a, b, cfg)?)
    } else {
        None
    };
    let stat = match (cfg.mode, &pg) {
        (TestMode::Mmd, Some(pg)) => mmd_statistic(pg, a, b),
        _ => smooth_statistic(a, b, cfg, seed.derive(STATISTIC_STREAM))?,
    };
    let values = bootstrap_values(a, b, cfg, seed.derive(BOOTSTRAP_STREAM), pg.as_ref())?;
    let critical_value = order_statistic(&values, cfg.alpha);
    Ok(TestResult {
        statistic: stat,
        critical_value,
        reject: stat > critical_value,
        alpha: cfg.alpha,
        bootstrap_values: values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionPoint {
    pub alpha: f64,
    pub rejection_rate: f64,
    pub repetitions: usize,
}

/// Empirical rejection rate at each level over repeated draws of fresh samples.
///
/// Every repetition runs one test and evaluates all levels from the same
/// bootstrap replicates. With `spec_a == spec_b` this is the level curve.
#[allow(clippy::too_many_arguments)]
pub fn rejection_curve(
    spec_a: &DistributionSpec,
    spec_b: &DistributionSpec,
    m: usize,
    n: usize,
    cfg: &TestConfig,
    alphas: &[f64],
    repetitions: usize,
    seed: SeedSpec,
) -> Result<Vec<RejectionPoint>> {
    cfg.validate()?;
    if repetitions == 0 || alphas.is_empty() {
        return Err(Error::InvalidInput("need at least one repetition and one level".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::InvalidInput(format!("level {a} outside (0,1)")));
    }
    let decisions: Vec<Vec<bool>> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let rs = seed.derive(r as u64);
            let a = spec_a.sample(m, rs.derive(0))?;
            let b = spec_b.sample(n, rs.derive(1))?;
            let res = test(&a, &b, cfg, rs.derive(2))?;
            Ok(alphas.iter().map(|al| res.reject_at(*al)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| RejectionPoint {
            alpha,
            rejection_rate: decisions.iter().filter(|d| d[j]).count() as f64 / repetitions as f64,
            repetitions,
        })
        .collect())
}
