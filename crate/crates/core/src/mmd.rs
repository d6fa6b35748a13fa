//! The smooth Sobolev IPM `d₂^(σ)` through its MMD form, the closed-form
//! one-sample expectation `E[d₂(μ̂_n, μ)²] = (E κ(X,X) − E κ(X,X'))/n`, and the
//! comparison bound on the smooth Wasserstein distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DistributionSpec, EmpiricalMeasure};
use crate::rng::SeedSpec;
use crate::specialfn::{dot, kernel_from_inner, KernelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Plug-in estimator including the diagonal.
    #[default]
    VStatistic,
    /// Diagonal-excluded estimator; needs uniform weights and two points per side.
    UStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    /// Can be slightly negative (U-statistic, or rounding for the V-statistic).
    pub d2_squared: f64,
    pub d2: f64,
    pub estimator_kind: EstimatorKind,
}

impl MmdResult {
    fn new(d2_squared: f64, estimator_kind: EstimatorKind) -> Self {
        Self {
            d2_squared,
            d2: d2_squared.max(0.0).sqrt(),
            estimator_kind,
        }
    }
}

/// `Σ_i Σ_j w_i w_j κ(x_i, x_j)`, optionally skipping the diagonal.
fn self_term(m: &EmpiricalMeasure, params: KernelParams, diagonal: bool) -> Result<f64> {
    let n = m.len();
    let w = m.weights();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = m.point(i);
            let mut acc = 0.0;
            for j in (i + 1)..n {
                acc += w[j] * kernel_from_inner(dot(xi, m.point(j)), params)?;
            }
            let mut row = 2.0 * w[i] * acc;
            if diagonal {
                row += w[i] * w[i] * kernel_from_inner(dot(xi, xi), params)?;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum())
}

/// `Σ_i Σ_j a_i b_j κ(x_i, y_j)`.
fn cross_term(a: &EmpiricalMeasure, b: &EmpiricalMeasure, params: KernelParams) -> Result<f64> {
    let wb = b.weights();
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let xi = a.point(i);
            let mut acc = 0.0;
            for (j, wj) in wb.iter().enumerate() {
                acc += wj * kernel_from_inner(dot(xi, b.point(j)), params)?;
            }
            Ok(a.weights()[i] * acc)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum())
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

/// Squared `d₂^(σ)` between two empirical measures.
///
/// The V-statistic is the weighted double sum
/// `Σ a_i a_j κ(x_i,x_j) + Σ b_i b_j κ(y_i,y_j) − 2 Σ a_i b_j κ(x_i,y_j)`.
pub fn d2_squared(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    params: KernelParams,
    kind: EstimatorKind,
) -> Result<MmdResult> {
    check_dims(a, b)?;
    let value = match kind {
        EstimatorKind::VStatistic => {
            self_term(a, params, true)? + self_term(b, params, true)?
                - 2.0 * cross_term(a, b, params)?
        }
        EstimatorKind::UStatistic => {
            if a.len() < 2 || b.len() < 2 || !a.is_uniform() || !b.is_uniform() {
                return Err(Error::InvalidInput(
                    "U-statistic needs uniform weights and at least two points per measure".into(),
                ));
            }
            // rescale the off-diagonal double sums from 1/m² to 1/(m(m−1))
            let (m, n) = (a.len() as f64, b.len() as f64);
            self_term(a, params, false)? * m / (m - 1.0)
                + self_term(b, params, false)? * n / (n - 1.0)
                - 2.0 * cross_term(a, b, params)?
        }
    };
    Ok(MmdResult::new(value, kind))
}

/// Largest `|x|·|y|/σ²` handled by the 1-D moment expansion.
const MOMENT_RADIUS: f64 = 40.0;
const MOMENT_TERMS: usize = 160;

/// In one dimension `κ(x,y) = σ² Σ_k (xy/σ²)^k / (k·k!)`, so sums against a
/// fixed measure reduce to its scaled power moments `Σ_j w_j (y_j/σ)^k`.
#[derive(Debug, Clone)]
struct Moments {
    /// `coef[k-1] = σ² Σ_j w_j (y_j/σ)^k / (k·k!)`
    coef: Vec<f64>,
    /// `max_j |y_j| / σ`
    radius: f64,
}

impl Moments {
    fn build(m: &EmpiricalMeasure, sigma: f64) -> Option<Self> {
        let scaled: Vec<f64> = m.coords().iter().map(|y| y / sigma).collect();
        let radius = scaled.iter().fold(0.0f64, |a, y| a.max(y.abs()));
        if radius > MOMENT_RADIUS {
            return None;
        }
        let mut power = m.weights().to_vec();
        let mut coef = Vec::with_capacity(MOMENT_TERMS);
        let mut fact = 1.0;
        for k in 1..=MOMENT_TERMS {
            fact *= k as f64;
            let mut acc = 0.0;
            for (p, y) in power.iter_mut().zip(&scaled) {
                *p *= y;
                acc += *p;
            }
            coef.push(sigma * sigma * acc / (k as f64 * fact));
        }
        Some(Self { coef, radius })
    }

    /// `Σ_j w_j κ(x, y_j)`, or `None` when the series is not safe to use.
    fn eval(&self, x: f64, sigma: f64) -> Option<f64> {
        let u = x / sigma;
        let t = u.abs() * self.radius;
        if t > MOMENT_RADIUS {
            return None;
        }
        let mut pw = 1.0;
        let mut acc = 0.0;
        let mut mag = 0.0;
        for (k, c) in self.coef.iter().enumerate() {
            pw *= u;
            let term = c * pw;
            acc += term;
            mag += term.abs();
            if k as f64 > 2.0 * t + 10.0 && term.abs() <= 1e-18 * mag {
                break;
            }
        }
        Some(acc)
    }
}

/// A fixed reference measure with its self-interaction precomputed, for many
/// one-sample comparisons `d₂(μ̂_n, μ̂_ref)` against the same reference.
///
/// One-dimensional references are summarized by power moments, making each
/// comparison `O(n² + n·K)` instead of `O(n² + n·R)`.
#[derive(Debug, Clone)]
pub struct MmdReference {
    measure: EmpiricalMeasure,
    params: KernelParams,
    self_term: f64,
    moments: Option<Moments>,
}

impl MmdReference {
    pub fn new(measure: EmpiricalMeasure, params: KernelParams) -> Result<Self> {
        let moments = if measure.dim() == 1 {
            Moments::build(&measure, params.sigma())
        } else {
            None
        };
        let self_term = match &moments {
            Some(mo) => {
                let sigma = params.sigma();
                let terms: Option<Vec<f64>> = measure
                    .coords()
                    .iter()
                    .zip(measure.weights())
                    .map(|(y, w)| mo.eval(*y, sigma).map(|v| w * v))
                    .collect();
                match terms {
                    Some(t) => t.iter().sum(),
                    None => self_term(&measure, params, true)?,
                }
            }
            None => self_term(&measure, params, true)?,
        };
        Ok(Self {
            measure,
            params,
            self_term,
            moments,
        })
    }

    pub fn measure(&self) -> &EmpiricalMeasure {
        &self.measure
    }

    fn cross(&self, sample: &EmpiricalMeasure) -> Result<f64> {
        if let Some(mo) = &self.moments {
            let sigma = self.params.sigma();
            let mut acc = 0.0;
            let mut ok = true;
            for (x, w) in sample.coords().iter().zip(sample.weights()) {
                match mo.eval(*x, sigma) {
                    Some(v) => acc += w * v,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(acc);
            }
        }
        cross_term(sample, &self.measure, self.params)
    }

    /// V-statistic `d₂²` between two cached references.
    pub fn d2_squared_between(&self, other: &MmdReference) -> Result<MmdResult> {
        check_dims(&self.measure, &other.measure)?;
        if self.params != other.params {
            return Err(Error::InvalidInput("references use different kernel parameters".into()));
        }
        let value = self.self_term + other.self_term - 2.0 * other.cross(&self.measure)?;
        Ok(MmdResult::new(value, EstimatorKind::VStatistic))
    }

    /// V-statistic `d₂²(sample, reference)`.
    pub fn d2_squared(&self, sample: &EmpiricalMeasure) -> Result<MmdResult> {
        check_dims(sample, &self.measure)?;
        let value = self_term(sample, self.params, true)? + self.self_term - 2.0 * self.cross(sample)?;
        Ok(MmdResult::new(value, EstimatorKind::VStatistic))
    }
}

/// Monte Carlo estimates of `E κ(X,X)` and `E κ(X,X')` for `X, X'` i.i.d. from a spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelExpectations {
    pub diagonal: f64,
    pub off_diagonal: f64,
    /// Mean of the paired differences `κ(X,X) − κ(X,X')`.
    pub difference: f64,
    /// Standard error of `difference`.
    pub difference_se: f64,
    pub samples: usize,
}

impl KernelExpectations {
    /// `E[d₂(μ̂_n, μ)²] = difference / n`.
    pub fn expected_d2_squared(&self, n: usize) -> f64 {
        self.difference / n as f64
    }

    pub fn expected_d2_squared_se(&self, n: usize) -> f64 {
        self.difference_se / n as f64
    }
}

const MC_CHUNK: usize = 10_000;

/// Estimate the kernel expectations with `mc` draws of independent pairs.
///
/// Draws are split into chunks of 10⁴ with their own derived streams, so the
/// result is independent of how chunks are scheduled.
pub fn kernel_expectations(
    spec: &DistributionSpec,
    params: KernelParams,
    mc: usize,
    seed: SeedSpec,
) -> Result<KernelExpectations> {
    spec.validate()?;
    if mc < 2 {
        return Err(Error::InvalidInput("need at least two Monte Carlo draws".into()));
    }
    let chunks = mc.div_ceil(MC_CHUNK);
    let partial: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = MC_CHUNK.min(mc - c * MC_CHUNK);
            let mut rng = seed.derive(c as u64).rng();
            let mut x = Vec::with_capacity(spec.dim);
            let mut y = Vec::with_capacity(spec.dim);
            let mut acc = [0.0; 4];
            for _ in 0..size {
                x.clear();
                y.clear();
                spec.draw_into(&mut rng, &mut x);
                spec.draw_into(&mut rng, &mut y);
                let kd = kernel_from_inner(dot(&x, &x), params)?;
                let ko = kernel_from_inner(dot(&x, &y), params)?;
                let h = kd - ko;
                acc[0] += kd;
                acc[1] += ko;
                acc[2] += h;
                acc[3] += h * h;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut tot = [0.0; 4];
    for p in &partial {
        for (t, v) in tot.iter_mut().zip(p) {
            *t += v;
        }
    }
    let n = mc as f64;
    let mean = tot[2] / n;
    let var = ((tot[3] - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(KernelExpectations {
        diagonal: tot[0] / n,
        off_diagonal: tot[1] / n,
        difference: mean,
        difference_se: (var / n).sqrt(),
        samples: mc,
    })
}

/// Monte Carlo value of `E[d₂^(σ)(μ̂_n, μ)²]` with its standard error.
pub fn one_sample_identity(
    spec: &DistributionSpec,
    params: KernelParams,
    n: usize,
    mc: usize,
    seed: SeedSpec,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let e = kernel_expectations(spec, params, mc, seed)?;
    Ok((e.expected_d2_squared(n), e.expected_d2_squared_se(n)))
}

/// Comparison bound `GW_p ≤ p · exp(E|X|² / (2qσ²)) · d_p^(σ)` for a centered
/// measure, with `q = p/(p−1)`.
pub fn gw_upper_bound(d_value: f64, second_moment: f64, p: f64, sigma: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("bound needs p > 1, got {p}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) || second_moment < 0.0 || d_value < 0.0 {
        return Err(Error::InvalidInput("bound needs sigma > 0 and nonnegative inputs".into()));
    }
    let q = p / (p - 1.0);
    let exponent = second_moment / (2.0 * q * sigma * sigma);
    if exponent > 709.0 {
        return Err(Error::Overflow(format!("bound exponent {exponent} too large")));
    }
    Ok(p * exponent.exp() * d_value)
}
