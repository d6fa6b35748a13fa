//! Minimum smooth Wasserstein estimation for one-dimensional parametric families.
//!
//! The objective `θ ↦ GW_p(μ̂_n, ν̂_θ)` uses common random numbers: the model
//! sample is a fixed transformation of base normals, and both sides draw their
//! noise replicas from one stream keyed by sorted position. The objective is
//! therefore a deterministic, continuous function of `θ`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DistributionKind, DistributionSpec, EmpiricalMeasure};
use crate::ot::DEFAULT_NOISE_REPLICAS;
use crate::rng::SeedSpec;

/// Box bounds on location parameters.
pub const MEAN_BOUND: f64 = 10.0;
/// Smallest admissible scale.
pub const SCALE_MIN: f64 = 1e-3;
pub const SCALE_MAX: f64 = 10.0;

const MODEL_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamFamily {
    /// `½N(a₁,1) + ½N(a₂,1)`, `θ = (a₁, a₂)`.
    TwoModeMeans,
    /// `N(a, s²)`, `θ = (a, s)`.
    GaussianMeanScale,
}

impl ParamFamily {
    pub fn n_params(self) -> usize {
        2
    }

    pub fn check(self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InfeasibleTheta(format!("{theta:?}")));
        }
        let ok = match self {
            Self::TwoModeMeans => theta.iter().all(|a| a.abs() <= MEAN_BOUND),
            Self::GaussianMeanScale => {
                theta[0].abs() <= MEAN_BOUND && (SCALE_MIN..=SCALE_MAX).contains(&theta[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InfeasibleTheta(format!("{theta:?} outside the parameter box")))
        }
    }

    fn lower(self) -> [f64; 2] {
        match self {
            Self::TwoModeMeans => [-MEAN_BOUND, -MEAN_BOUND],
            Self::GaussianMeanScale => [-MEAN_BOUND, SCALE_MIN],
        }
    }

    fn upper(self) -> [f64; 2] {
        match self {
            Self::TwoModeMeans => [MEAN_BOUND, MEAN_BOUND],
            Self::GaussianMeanScale => [MEAN_BOUND, SCALE_MAX],
        }
    }

    fn project(self, theta: &mut [f64]) {
        let (lo, hi) = (self.lower(), self.upper());
        for (i, t) in theta.iter_mut().enumerate() {
            *t = t.clamp(lo[i], hi[i]);
        }
    }

    /// Order mixture means so that `a₁ ≤ a₂`.
    pub fn canonicalize(self, theta: &mut [f64]) {
        if self == Self::TwoModeMeans && theta[0] > theta[1] {
            theta.swap(0, 1);
        }
    }

    /// The model as a sampling spec, for drawing fresh data.
    pub fn distribution(self, theta: &[f64]) -> Result<DistributionSpec> {
        self.check(theta)?;
        let spec = match self {
            Self::TwoModeMeans => {
                DistributionSpec::mixture(vec![vec![theta[0]], vec![theta[1]]], vec![1.0, 1.0], vec![0.5, 0.5])
            }
            Self::GaussianMeanScale => DistributionSpec::gaussian(vec![theta[0]], theta[1]),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`Self::distribution`]: the parameter of a spec that lies in
    /// the family, canonicalized.
    pub fn theta_of(self, spec: &DistributionSpec) -> Result<Vec<f64>> {
        let bad = || Error::Config(format!("spec is not a member of the {self:?} family"));
        if spec.dim != 1 {
            return Err(bad());
        }
        let mut theta = match (self, &spec.kind) {
            (Self::GaussianMeanScale, DistributionKind::Gaussian { mean, scale }) => vec![mean[0], *scale],
            (
                Self::TwoModeMeans,
                DistributionKind::GaussianMixture {
                    means,
                    scales,
                    mixture_weights,
                },
            ) if means.len() == 2
                && scales.iter().all(|s| *s == 1.0)
                && (mixture_weights[0] - mixture_weights[1]).abs() < 1e-12 =>
            {
                vec![means[0][0], means[1][0]]
            }
            _ => return Err(bad()),
        };
        self.check(&theta)?;
        self.canonicalize(&mut theta);
        Ok(theta)
    }

    fn base_len(self, n: usize) -> usize {
        match self {
            Self::TwoModeMeans => n - n / 2,
            Self::GaussianMeanScale => n,
        }
    }

    /// Sorted model points from base normals.
    ///
    /// For the mixture, `n − ⌊n/2⌋` points go to the first mode and `⌊n/2⌋` to the
    /// second, both reusing the same base normals, so swapping the means leaves
    /// the point set unchanged when `n` is even.
    fn transform(self, theta: &[f64], base: &[f64], n: usize, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Self::TwoModeMeans => {
                out.extend(base.iter().map(|z| theta[0] + z));
                out.extend(base[..n / 2].iter().map(|z| theta[1] + z));
            }
            Self::GaussianMeanScale => out.extend(base.iter().map(|z| theta[0] + theta[1] * z)),
        }
        out.sort_unstable_by(f64::total_cmp);
    }

    /// The common-random-numbers model sample `ν̂_θ` used by [`objective`] with this seed.
    pub fn model_sample(self, theta: &[f64], n: usize, seed: SeedSpec) -> Result<EmpiricalMeasure> {
        self.check(theta)?;
        if n == 0 {
            return Err(Error::InvalidInput("model sample needs n >= 1".into()));
        }
        let base = base_normals(self.base_len(n), seed);
        let mut out = Vec::with_capacity(n);
        self.transform(theta, &base, n, &mut out);
        EmpiricalMeasure::uniform(out, 1)
    }
}

fn base_normals(len: usize, seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.derive(MODEL_STREAM).rng();
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// `W_p^p` between uniform measures on two sorted value lists.
fn sorted_uniform_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let (nx, ny) = (x.len() as u128, y.len() as u128);
    if nx == ny {
        let s: f64 = x.iter().zip(y).map(|(a, b)| abs_pow(a - b, p)).sum();
        return s / x.len() as f64;
    }
    // cumulative masses in units of 1/(nx·ny)
    let scale = (nx * ny) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut cx, mut cy, mut prev) = (ny, nx, 0u128);
    let mut cost = 0.0;
    loop {
        let next = cx.min(cy);
        if next > prev {
            cost += (next - prev) as f64 / scale * abs_pow(x[i] - y[j], p);
        }
        prev = next;
        if cx <= cy {
            i += 1;
            if i == x.len() {
                break;
            }
            cx += ny;
        } else {
            j += 1;
            if j == y.len() {
                break;
            }
            cy += nx;
        }
    }
    cost
}

/// Settings shared by objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub p: f64,
    pub sigma: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    /// `None` uses the data size.
    #[serde(default)]
    pub model_n: Option<usize>,
}

fn default_k() -> usize {
    DEFAULT_NOISE_REPLICAS
}

impl ObjectiveConfig {
    pub fn new(p: f64, sigma: f64) -> Self {
        Self {
            p,
            sigma,
            k: default_k(),
            model_n: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::Config(format!("p must be >= 1, got {}", self.p)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.k == 0 || self.model_n == Some(0) {
            return Err(Error::Config("k and model_n must be positive".into()));
        }
        Ok(())
    }
}

/// The objective with its data-side work and random numbers cached.
#[derive(Debug, Clone)]
pub struct Objective {
    family: ParamFamily,
    cfg: ObjectiveConfig,
    model_n: usize,
    base: Vec<f64>,
    /// `σ·e_{t,r}` for sorted model position `t`, replica `r`
    noise: Vec<f64>,
    /// sorted augmented data values
    data: Vec<f64>,
}

impl Objective {
    pub fn new(family: ParamFamily, data: &EmpiricalMeasure, cfg: ObjectiveConfig, seed: SeedSpec) -> Result<Self> {
        cfg.validate()?;
        let values = data.values_1d()?;
        if !data.is_uniform() {
            return Err(Error::InvalidInput("fitting expects uniformly weighted data".into()));
        }
        let model_n = cfg.model_n.unwrap_or(data.len());
        let k = if cfg.sigma == 0.0 { 1 } else { cfg.k };
        let slots = model_n.max(data.len());
        let mut rng = seed.derive(NOISE_STREAM).rng();
        let noise: Vec<f64> = (0..slots * k)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                cfg.sigma * z
            })
            .collect();
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mut augmented = Vec::with_capacity(sorted.len() * k);
        for (t, x) in sorted.iter().enumerate() {
            augmented.extend(noise[t * k..(t + 1) * k].iter().map(|e| x + e));
        }
        augmented.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            family,
            cfg,
            model_n,
            base: base_normals(family.base_len(model_n), seed),
            noise,
            data: augmented,
        })
    }

    pub fn family(&self) -> ParamFamily {
        self.family
    }

    fn k(&self) -> usize {
        if self.cfg.sigma == 0.0 {
            1
        } else {
            self.cfg.k
        }
    }

    /// `GW_p(μ̂_n, ν̂_θ)` under the fixed random numbers.
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        self.family.check(theta)?;
        let k = self.k();
        let mut model = Vec::with_capacity(self.model_n);
        self.family.transform(theta, &self.base, self.model_n, &mut model);
        let mut augmented = Vec::with_capacity(self.model_n * k);
        for (t, x) in model.iter().enumerate() {
            augmented.extend(self.noise[t * k..(t + 1) * k].iter().map(|e| x + e));
        }
        augmented.sort_unstable_by(f64::total_cmp);
        let cost = sorted_uniform_cost(&self.data, &augmented, self.cfg.p);
        Ok(cost.max(0.0).powf(1.0 / self.cfg.p))
    }
}

/// One-shot objective evaluation; see [`Objective`].
pub fn objective(
    family: ParamFamily,
    theta: &[f64],
    data: &EmpiricalMeasure,
    cfg: ObjectiveConfig,
    seed: SeedSpec,
) -> Result<f64> {
    Objective::new(family, data, cfg, seed)?.eval(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub max_iter: usize,
    /// Stop when the accepted step is below this in max norm...
    pub step_tol: f64,
    /// ...and the objective decrease is below this.
    pub f_tol: f64,
    pub restarts: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            step_tol: 1e-6,
            f_tol: 1e-10,
            restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub objective_value: f64,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
}

/// Restart points: a fixed pattern scaled by the data mean and spread.
fn starts(family: ParamFamily, data: &EmpiricalMeasure, restarts: usize) -> Vec<Vec<f64>> {
    let mean = data.mean()[0];
    let sd = data.cov_trace().sqrt().max(0.1);
    let pattern: [[f64; 2]; 5] = match family {
        ParamFamily::TwoModeMeans => [[-1.0, 1.0], [-0.5, 0.5], [-1.5, 1.5], [-1.0, 0.0], [0.0, 1.0]],
        ParamFamily::GaussianMeanScale => [[0.0, 1.0], [0.0, 0.5], [0.0, 2.0], [-0.5, 1.0], [0.5, 1.0]],
    };
    (0..restarts)
        .map(|r| {
            let c = pattern[r % pattern.len()];
            let mut theta = match family {
                ParamFamily::TwoModeMeans => vec![mean + c[0] * sd, mean + c[1] * sd],
                ParamFamily::GaussianMeanScale => vec![mean + c[0] * sd, c[1] * sd],
            };
            family.project(&mut theta);
            theta
        })
        .collect()
}

struct Descent {
    theta: Vec<f64>,
    value: f64,
    converged: bool,
}

fn fd_gradient(obj: &Objective, theta: &[f64]) -> Result<Vec<f64>> {
    let family = obj.family();
    let (lo, hi) = (family.lower(), family.upper());
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let h = 1e-3 * (1.0 + theta[i].abs());
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[i] = (theta[i] + h).min(hi[i]);
        dn[i] = (theta[i] - h).max(lo[i]);
        grad[i] = (obj.eval(&up)? - obj.eval(&dn)?) / (up[i] - dn[i]);
    }
    Ok(grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected descent along quasi-Newton (BFGS) directions with backtracking.
/// The inverse-Hessian estimate falls back to the identity whenever the
/// direction stops being a descent direction.
fn descend(obj: &Objective, start: Vec<f64>, opt: &OptConfig, restart: usize, trace: &mut Vec<TraceEntry>) -> Result<Descent> {
    let family = obj.family();
    let dim = start.len();
    let identity = |scale: f64| -> Vec<f64> {
        let mut h = vec![0.0; dim * dim];
        for i in 0..dim {
            h[i * dim + i] = scale;
        }
        h
    };
    let mut theta = start;
    let mut value = obj.eval(&theta)?;
    let mut grad = fd_gradient(obj, &theta)?;
    let mut hinv = identity(1.0);
    trace.push(TraceEntry {
        restart,
        iteration: 0,
        theta: theta.clone(),
        objective: value,
    });
    for it in 1..=opt.max_iter {
        let mut dir: Vec<f64> = (0..dim).map(|i| -dot(&hinv[i * dim..(i + 1) * dim], &grad)).collect();
        if dot(&dir, &grad) >= 0.0 {
            hinv = identity(1.0);
            dir = grad.iter().map(|g| -g).collect();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut cand: Vec<f64> = theta.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
            family.project(&mut cand);
            let v = obj.eval(&cand)?;
            // Armijo condition on the projected displacement
            let moved: Vec<f64> = cand.iter().zip(&theta).map(|(c, x)| c - x).collect();
            if v <= value + 1e-4 * dot(&grad, &moved) {
                accepted = Some((cand, v));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, v)) = accepted else {
            return Ok(Descent {
                theta,
                value,
                converged: true,
            });
        };
        let new_grad = fd_gradient(obj, &cand)?;
        let sv: Vec<f64> = cand.iter().zip(&theta).map(|(c, x)| c - x).collect();
        let yv: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&sv, &yv);
        if sy > 1e-12 * dot(&sv, &sv).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
            if it == 1 {
                hinv = identity(sy / dot(&yv, &yv));
            }
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..dim).map(|i| dot(&hinv[i * dim..(i + 1) * dim], &yv)).collect();
            let yhy = dot(&yv, &hy);
            for i in 0..dim {
                for j in 0..dim {
                    hinv[i * dim + j] += -rho * (hy[i] * sv[j] + sv[i] * hy[j]) + (rho * rho * yhy + rho) * sv[i] * sv[j];
                }
            }
        }
        let dx = sv.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let df = value - v;
        theta = cand;
        value = v;
        grad = new_grad;
        trace.push(TraceEntry {
            restart,
            iteration: it,
            theta: theta.clone(),
            objective: value,
        });
        if dx < opt.step_tol && df < opt.f_tol {
            return Ok(Descent {
                theta,
                value,
                converged: true,
            });
        }
    }
    Ok(Descent {
        theta,
        value,
        converged: false,
    })
}

/// Minimize the objective by projected finite-difference descent with restarts.
pub fn fit(
    data: &EmpiricalMeasure,
    family: ParamFamily,
    cfg: ObjectiveConfig,
    opt: &OptConfig,
    seed: SeedSpec,
) -> Result<FitResult> {
    if opt.restarts == 0 || opt.max_iter == 0 {
        return Err(Error::Config("fit needs at least one restart and one iteration".into()));
    }
    let obj = Objective::new(family, data, cfg, seed)?;
    let mut trace = Vec::new();
    let mut best: Option<Descent> = None;
    for (r, start) in starts(family, data, opt.restarts).into_iter().enumerate() {
        let d = descend(&obj, start, opt, r, &mut trace)?;
        if best.as_ref().is_none_or(|b| d.value < b.value) {
            best = Some(d);
        }
    }
    let best = best.expect("at least one restart");
    let mut theta_hat = best.theta;
    family.canonicalize(&mut theta_hat);
    let objective_value = obj.eval(&theta_hat)?;
    Ok(FitResult {
        theta_hat,
        objective_value,
        trace,
        converged: best.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n: usize,
    pub trial: usize,
    pub theta_hat: Vec<f64>,
    /// `√n·(θ̂ − θ*)`
    pub scaled_error: Vec<f64>,
    pub objective_at_hat: f64,
    pub objective_at_true: f64,
    pub converged: bool,
    /// Set when the trial failed; the numeric fields are then NaN.
    pub failure: Option<String>,
}

/// Fit fresh data sets drawn from `ν_θ*` for every `(n, trial)`.
pub fn error_experiment(
    family: ParamFamily,
    true_theta: &[f64],
    cfg: ObjectiveConfig,
    opt: &OptConfig,
    n_grid: &[usize],
    trials: usize,
    seed: SeedSpec,
) -> Result<Vec<ErrorRecord>> {
    let spec = family.distribution(true_theta)?;
    error_experiment_with_data(&spec, family, true_theta, cfg, opt, n_grid, trials, seed)
}

/// As [`error_experiment`], with data drawn from `data` and errors measured
/// against `true_theta`.
#[allow(clippy::too_many_arguments)]
pub fn error_experiment_with_data(
    data: &DistributionSpec,
    family: ParamFamily,
    true_theta: &[f64],
    cfg: ObjectiveConfig,
    opt: &OptConfig,
    n_grid: &[usize],
    trials: usize,
    seed: SeedSpec,
) -> Result<Vec<ErrorRecord>> {
    family.check(true_theta)?;
    data.validate()?;
    let spec = data;
    let mut truth = true_theta.to_vec();
    family.canonicalize(&mut truth);
    let cells: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(n, trial)| {
            let cs = seed.derive(n as u64).derive(trial as u64);
            let run = || -> Result<ErrorRecord> {
                let data = spec.sample(n, cs.derive(0))?;
                let res = fit(&data, family, cfg, opt, cs.derive(1))?;
                let at_true = Objective::new(family, &data, cfg, cs.derive(1))?.eval(&truth)?;
                let rn = (n as f64).sqrt();
                Ok(ErrorRecord {
                    n,
                    trial,
                    scaled_error: res.theta_hat.iter().zip(&truth).map(|(h, t)| rn * (h - t)).collect(),
                    theta_hat: res.theta_hat,
                    objective_at_hat: res.objective_value,
                    objective_at_true: at_true,
                    converged: res.converged,
                    failure: None,
                })
            };
            run().unwrap_or_else(|e| ErrorRecord {
                n,
                trial,
                theta_hat: vec![f64::NAN; truth.len()],
                scaled_error: vec![f64::NAN; truth.len()],
                objective_at_hat: f64::NAN,
                objective_at_true: f64::NAN,
                converged: false,
                failure: Some(e.to_string()),
            })
        })
        .collect())
}
