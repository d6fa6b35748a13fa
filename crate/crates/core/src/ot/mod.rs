//! p-Wasserstein distances between discrete measures and their Gaussian-smoothed
//! counterparts.
//!
//! | method | where | cost |
//! |---|---|---|
//! | [`wasserstein_1d`] | `d = 1`, any weights | `O((m+n) log(m+n))` |
//! | [`OtMethod::ExactLp`] | any `d`, `m·n ≤ 10⁶` | network simplex |
//! | [`OtMethod::Sinkhorn`] | any `d` | `O(mn)` per iteration, entropic bias |
//!
//! The smooth distance `W_p(μ * N_σ, ν * N_σ)` is approximated by replacing each
//! measure with its noise-augmented sample ([`EmpiricalMeasure::augment`]).

mod simplex;
mod sinkhorn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::measures::EmpiricalMeasure;
use crate::rng::SeedSpec;

/// Largest `m·n` accepted by the exact solver.
pub const EXACT_LP_MAX_PAIRS: usize = 16_000_000;

/// Default number of noise replicas per point for smooth distances.
pub const DEFAULT_NOISE_REPLICAS: usize = 16;

const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OtMethod {
    Quantile1d,
    #[default]
    ExactLp,
    Sinkhorn {
        /// `None` selects `0.01 · median(cost)`.
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

fn default_max_iter() -> usize {
    100_000
}

fn default_tol() -> f64 {
    1e-6
}

impl OtMethod {
    pub fn sinkhorn(epsilon: Option<f64>) -> Self {
        Self::Sinkhorn {
            epsilon,
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtConfig {
    pub p: f64,
    #[serde(default)]
    pub method: OtMethod,
}

impl OtConfig {
    pub fn new(p: f64, method: OtMethod) -> Self {
        Self { p, method }
    }

    pub fn exact(p: f64) -> Self {
        Self::new(p, OtMethod::ExactLp)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::InvalidInput(format!("p must be >= 1, got {}", self.p)));
        }
        if let OtMethod::Sinkhorn {
            epsilon,
            max_iter,
            tol,
        } = self.method
        {
            if epsilon.is_some_and(|e| !(e.is_finite() && e > 0.0)) || max_iter == 0 || tol <= 0.0 {
                return Err(Error::InvalidInput("invalid sinkhorn parameters".into()));
            }
        }
        Ok(())
    }
}

/// Coupling together with its `p`-th power cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub plan: Matrix,
    pub cost: f64,
    pub p: f64,
}

impl TransportPlan {
    /// `cost^{1/p}`, with rounding-level negative costs clamped to zero.
    pub fn distance(&self) -> f64 {
        self.cost.max(0.0).powf(1.0 / self.p)
    }

    /// Write the plan as CSV rows `i,j,mass` (nonzero entries only).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,mass")?;
        for i in 0..self.plan.rows() {
            for (j, v) in self.plan.row(i).iter().enumerate() {
                if *v > 0.0 {
                    writeln!(w, "{i},{j},{v:e}")?;
                }
            }
        }
        Ok(())
    }
}

fn check_dims(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

#[inline]
fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(0.5 * p)
    }
}

#[inline]
fn abs_pow(d: f64, p: f64) -> f64 {
    let d = d.abs();
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

/// `|x_i − y_j|^p` for every pair.
pub fn cost_matrix(a: &EmpiricalMeasure, b: &EmpiricalMeasure, p: f64) -> Result<Matrix> {
    check_dims(a, b)?;
    let mut c = Matrix::zeros(a.len(), b.len());
    for (i, x) in a.points().enumerate() {
        for (j, y) in b.points().enumerate() {
            c.set(i, j, ground_cost(x, y, p));
        }
    }
    Ok(c)
}

/// Indices sorted by value, ties kept in index order.
fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

/// Walk the merged quantile partition of two 1-D measures, calling `visit(i, j, mass)`
/// for every cell of the monotone coupling.
fn merge_quantiles(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<()> {
    let xa = a.values_1d()?;
    let xb = b.values_1d()?;
    let (wa, wb) = (a.weights(), b.weights());
    let oa = sorted_order(xa);
    let ob = sorted_order(xb);
    let (mut i, mut j) = (0usize, 0usize);
    let mut ca = wa[oa[0]];
    let mut cb = wb[ob[0]];
    let mut prev = 0.0f64;
    loop {
        let next = ca.min(cb);
        let mass = next - prev;
        if mass > 0.0 {
            visit(oa[i], ob[j], mass);
        }
        prev = prev.max(next);
        if ca <= cb {
            i += 1;
            if i == oa.len() {
                break;
            }
            ca += wa[oa[i]];
        } else {
            j += 1;
            if j == ob.len() {
                break;
            }
            cb += wb[ob[j]];
        }
    }
    Ok(())
}

/// Exact `W_p` between two one-dimensional measures via their quantile functions.
pub fn wasserstein_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure, p: f64) -> Result<f64> {
    OtConfig::new(p, OtMethod::Quantile1d).validate()?;
    Ok(cost_1d(a, b, p)?.max(0.0).powf(1.0 / p))
}

/// `W_p^p` between one-dimensional measures.
pub fn cost_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let (xa, xb) = (a.values_1d()?, b.values_1d()?);
    let mut cost = 0.0;
    merge_quantiles(a, b, |i, j, mass| cost += mass * abs_pow(xa[i] - xb[j], p))?;
    Ok(cost)
}

/// Solve the discrete transport problem with the configured method.
pub fn wasserstein_discrete(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    cfg: &OtConfig,
) -> Result<TransportPlan> {
    cfg.validate()?;
    check_dims(a, b)?;
    let p = cfg.p;
    match cfg.method {
        OtMethod::Quantile1d => {
            let (xa, xb) = (a.values_1d()?, b.values_1d()?);
            let mut plan = Matrix::zeros(a.len(), b.len());
            let mut cost = 0.0;
            merge_quantiles(a, b, |i, j, mass| {
                plan.set(i, j, plan.get(i, j) + mass);
                cost += mass * abs_pow(xa[i] - xb[j], p);
            })?;
            Ok(TransportPlan { plan, cost, p })
        }
        OtMethod::ExactLp => {
            if a.len() * b.len() > EXACT_LP_MAX_PAIRS {
                return Err(Error::InvalidInput(format!(
                    "exact solver limited to m*n <= {EXACT_LP_MAX_PAIRS}, got {}x{}",
                    a.len(),
                    b.len()
                )));
            }
            let c = cost_matrix(a, b, p)?;
            let sol = simplex::solve(a.weights(), b.weights(), &c)?;
            Ok(TransportPlan {
                plan: sol.plan,
                cost: sol.cost,
                p,
            })
        }
        OtMethod::Sinkhorn {
            epsilon,
            max_iter,
            tol,
        } => {
            // zero-mass points carry no plan mass; solve on the support
            let ia: Vec<usize> = (0..a.len()).filter(|&i| a.weights()[i] > 0.0).collect();
            let ib: Vec<usize> = (0..b.len()).filter(|&j| b.weights()[j] > 0.0).collect();
            let sa = EmpiricalMeasure::new(
                ia.iter().flat_map(|&i| a.point(i).to_vec()).collect(),
                a.dim(),
                renormalize(ia.iter().map(|&i| a.weights()[i])),
            )?;
            let sb = EmpiricalMeasure::new(
                ib.iter().flat_map(|&j| b.point(j).to_vec()).collect(),
                b.dim(),
                renormalize(ib.iter().map(|&j| b.weights()[j])),
            )?;
            let c = cost_matrix(&sa, &sb, p)?;
            let eps = epsilon.unwrap_or_else(|| default_epsilon(&c));
            let sol = sinkhorn::solve(sa.weights(), sb.weights(), &c, eps, max_iter, tol)?;
            let mut plan = Matrix::zeros(a.len(), b.len());
            let mut cost = 0.0;
            for (r, &i) in ia.iter().enumerate() {
                for (s, &j) in ib.iter().enumerate() {
                    let v = sol.plan.get(r, s);
                    plan.set(i, j, v);
                    cost += v * c.get(r, s);
                }
            }
            Ok(TransportPlan { plan, cost, p })
        }
    }
}

fn renormalize(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let w: Vec<f64> = w.collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `0.01 · median` of the cost entries.
pub fn default_epsilon(cost: &Matrix) -> f64 {
    let mut v = cost.as_slice().to_vec();
    let mid = v.len() / 2;
    let (_, median, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    (0.01 * *median).max(f64::MIN_POSITIVE)
}

/// `W_p` using the exact quantile formula in one dimension and `cfg.method` otherwise.
pub fn distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure, cfg: &OtConfig) -> Result<f64> {
    cfg.validate()?;
    check_dims(a, b)?;
    if a.dim() == 1 {
        wasserstein_1d(a, b, cfg.p)
    } else {
        Ok(wasserstein_discrete(a, b, cfg)?.distance())
    }
}

/// How the two noise augmentations of a smooth distance are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCoupling {
    /// Independent streams for the two measures.
    #[default]
    Independent,
    /// Both measures reuse one stream, row by row.
    Common,
}

/// Estimate of `W_p(μ * N_σ, ν * N_σ)` from `k` noise replicas per point.
///
/// With `sigma == 0` no augmentation happens and this is [`distance`].
pub fn smooth_wasserstein(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    sigma: f64,
    cfg: &OtConfig,
    k: usize,
    seed: SeedSpec,
) -> Result<f64> {
    smooth_wasserstein_with(a, b, sigma, cfg, k, seed, NoiseCoupling::Independent)
}

pub fn smooth_wasserstein_with(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    sigma: f64,
    cfg: &OtConfig,
    k: usize,
    seed: SeedSpec,
    coupling: NoiseCoupling,
) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
    }
    check_dims(a, b)?;
    if sigma == 0.0 {
        return distance(a, b, cfg);
    }
    let (aa, bb) = augmented_pair(a, b, sigma, k, seed, coupling)?;
    distance(&aa, &bb, cfg)
}

/// The two noise-augmented measures behind [`smooth_wasserstein_with`].
pub fn augmented_pair(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    sigma: f64,
    k: usize,
    seed: SeedSpec,
    coupling: NoiseCoupling,
) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
    let (sa, sb) = match coupling {
        NoiseCoupling::Independent => (seed.derive(1), seed.derive(2)),
        NoiseCoupling::Common => (seed.derive(1), seed.derive(1)),
    };
    Ok((a.augment(sigma, k, sa)?, b.augment(sigma, k, sb)?))
}

/// Check that a plan's marginals match the measures within `1e-9`.
pub fn check_marginals(plan: &TransportPlan, a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> bool {
    let rows = plan.plan.row_sums();
    let cols = plan.plan.col_sums();
    rows.iter().zip(a.weights()).all(|(r, w)| (r - w).abs() <= MARGINAL_TOL)
        && cols.iter().zip(b.weights()).all(|(c, w)| (c - w).abs() <= MARGINAL_TOL)
        && plan.plan.as_slice().iter().all(|v| *v >= 0.0)
}
