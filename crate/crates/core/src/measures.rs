//! Weighted empirical measures, declarative samplers and Gaussian noise augmentation.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeedSpec, StreamRng};

const WEIGHT_TOL: f64 = 1e-12;

/// Finite weighted point set in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// `points` is row-major `n × dim`; weights must be nonnegative and sum to one.
    pub fn new(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into rows of dimension {dim}",
                points.len()
            )));
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(Error::InvalidInput("measure needs at least one point".into()));
        }
        if weights.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} weights for {n} points",
                weights.len()
            )));
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(*x));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL * (n as f64).max(1.0) {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        let n = points.len().checked_div(dim).unwrap_or(0);
        let w = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        Self::new(points, dim, vec![w; n])
    }

    pub fn from_rows<P: AsRef<[f64]>>(rows: &[P]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::uniform(flat, dim)
    }

    /// Single Dirac mass.
    pub fn dirac(x: &[f64]) -> Result<Self> {
        Self::uniform(x.to_vec(), x.len())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|x| (x - w).abs() <= 1e-15)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other,
            });
        }
        Ok(())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (x, w) in self.points().zip(&self.weights) {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += w * xi;
            }
        }
        m
    }

    /// Trace of the weighted covariance, `Σ w_i |x_i − mean|²`.
    pub fn cov_trace(&self) -> f64 {
        let m = self.mean();
        self.points()
            .zip(&self.weights)
            .map(|(x, w)| {
                w * x
                    .iter()
                    .zip(&m)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum()
    }

    /// `Σ w_i |x_i|²`.
    pub fn second_moment(&self) -> f64 {
        self.points()
            .zip(&self.weights)
            .map(|(x, w)| w * x.iter().map(|a| a * a).sum::<f64>())
            .sum()
    }

    /// Translate every point by `−shift` (the push-forward `μ * δ_{−shift}`).
    pub fn center(&self, shift: &[f64]) -> Result<Self> {
        self.check_dim(shift.len())?;
        let points = self
            .points
            .chunks_exact(self.dim)
            .flat_map(|x| x.iter().zip(shift).map(|(a, s)| a - s))
            .collect();
        Ok(Self {
            dim: self.dim,
            points,
            weights: self.weights.clone(),
        })
    }

    /// Replace each point by `k` copies displaced by independent `N(0, σ²I)` noise.
    ///
    /// Copies of point `i` occupy rows `i*k .. (i+1)*k` and carry weight `w_i / k`.
    pub fn augment(&self, sigma: f64, k: usize, seed: SeedSpec) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("augmentation needs k >= 1".into()));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
        }
        let mut rng = seed.rng();
        let d = self.dim;
        let mut points = Vec::with_capacity(self.points.len() * k);
        let mut weights = Vec::with_capacity(self.len() * k);
        for (x, &w) in self.points().zip(&self.weights) {
            for _ in 0..k {
                for &xi in x.iter().take(d) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    points.push(xi + sigma * z);
                }
                weights.push(w / k as f64);
            }
        }
        Ok(Self {
            dim: d,
            points,
            weights,
        })
    }

    /// Mixture of the two measures with mass proportional to their point counts.
    pub fn pool(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let (m, n) = (self.len() as f64, other.len() as f64);
        let total = m + n;
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let weights = self
            .weights
            .iter()
            .map(|w| w * m / total)
            .chain(other.weights.iter().map(|w| w * n / total))
            .collect();
        Ok(Self {
            dim: self.dim,
            points,
            weights,
        })
    }

    /// Uniform measure on the selected rows (duplicates allowed).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            points.extend_from_slice(self.point(i));
        }
        Self::uniform(points, self.dim)
    }

    /// One-dimensional coordinates, or an error for `d ≠ 1`.
    pub fn values_1d(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim,
            });
        }
        Ok(&self.points)
    }

    /// Read a CSV with header `x1,...,xd,w`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let cols = headers.len();
        if cols < 2 || headers.get(cols - 1) != Some("w") {
            return Err(Error::Parse("expected header x1,...,xd,w".into()));
        }
        for (j, h) in headers.iter().take(cols - 1).enumerate() {
            if h != format!("x{}", j + 1) {
                return Err(Error::Parse(format!("unexpected column name {h:?}")));
            }
        }
        let dim = cols - 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number {field:?}")))?;
                if j < dim {
                    points.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        Self::new(points, dim, weights)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
        header.push("w".into());
        wtr.write_record(&header).map_err(|e| Error::Parse(e.to_string()))?;
        for (x, w) in self.points().zip(&self.weights) {
            let row: Vec<String> = x
                .iter()
                .chain(std::iter::once(w))
                .map(|v| format!("{v:e}"))
                .collect();
            wtr.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Declarative sampling distribution used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: DistributionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    /// Uniform on `center + [−half_width, half_width]^d`; the center defaults to the origin.
    UniformCube {
        half_width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// Isotropic `N(mean, scale² I)`.
    Gaussian { mean: Vec<f64>, scale: f64 },
    GaussianMixture {
        means: Vec<Vec<f64>>,
        scales: Vec<f64>,
        mixture_weights: Vec<f64>,
    },
}

impl DistributionSpec {
    pub fn uniform_cube(dim: usize, half_width: f64) -> Self {
        Self {
            dim,
            kind: DistributionKind::UniformCube {
                half_width,
                center: None,
            },
        }
    }

    /// Uniform on the interval / box `[lo, hi]^d`.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            dim,
            kind: DistributionKind::UniformCube {
                half_width: 0.5 * (hi - lo),
                center: Some(vec![0.5 * (hi + lo); dim]),
            },
        }
    }

    pub fn gaussian(mean: Vec<f64>, scale: f64) -> Self {
        Self {
            dim: mean.len(),
            kind: DistributionKind::Gaussian { mean, scale },
        }
    }

    pub fn mixture(means: Vec<Vec<f64>>, scales: Vec<f64>, mixture_weights: Vec<f64>) -> Self {
        let dim = means.first().map(Vec::len).unwrap_or(0);
        Self {
            dim,
            kind: DistributionKind::GaussianMixture {
                means,
                scales,
                mixture_weights,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        match &self.kind {
            DistributionKind::UniformCube { half_width, center } => {
                if !(half_width.is_finite() && *half_width >= 0.0) {
                    return bad(format!("half_width must be >= 0, got {half_width}"));
                }
                if let Some(c) = center {
                    if c.len() != self.dim {
                        return bad(format!("center has length {}, dim is {}", c.len(), self.dim));
                    }
                }
            }
            DistributionKind::Gaussian { mean, scale } => {
                if mean.len() != self.dim {
                    return bad(format!("mean has length {}, dim is {}", mean.len(), self.dim));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
            }
            DistributionKind::GaussianMixture {
                means,
                scales,
                mixture_weights,
            } => {
                let k = means.len();
                if k == 0 || scales.len() != k || mixture_weights.len() != k {
                    return bad("mixture needs matching, non-empty means/scales/weights".into());
                }
                if means.iter().any(|m| m.len() != self.dim) {
                    return bad("mixture mean with wrong dimension".into());
                }
                if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return bad("mixture scales must be positive".into());
                }
                if mixture_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return bad("mixture weights must be nonnegative".into());
                }
                let total: f64 = mixture_weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("mixture weights sum to {total}"));
                }
            }
        }
        Ok(())
    }

    /// `E X` in closed form.
    pub fn mean(&self) -> Vec<f64> {
        match &self.kind {
            DistributionKind::UniformCube { center, .. } => {
                center.clone().unwrap_or_else(|| vec![0.0; self.dim])
            }
            DistributionKind::Gaussian { mean, .. } => mean.clone(),
            DistributionKind::GaussianMixture {
                means,
                mixture_weights,
                ..
            } => (0..self.dim)
                .map(|j| means.iter().zip(mixture_weights).map(|(m, w)| w * m[j]).sum())
                .collect(),
        }
    }

    /// The same law translated to mean zero.
    pub fn centered(&self) -> Self {
        let mu = self.mean();
        let shift = |v: &[f64]| -> Vec<f64> { v.iter().zip(&mu).map(|(a, b)| a - b).collect() };
        let kind = match &self.kind {
            DistributionKind::UniformCube { half_width, .. } => DistributionKind::UniformCube {
                half_width: *half_width,
                center: None,
            },
            DistributionKind::Gaussian { mean, scale } => DistributionKind::Gaussian {
                mean: shift(mean),
                scale: *scale,
            },
            DistributionKind::GaussianMixture {
                means,
                scales,
                mixture_weights,
            } => DistributionKind::GaussianMixture {
                means: means.iter().map(|m| shift(m)).collect(),
                scales: scales.clone(),
                mixture_weights: mixture_weights.clone(),
            },
        };
        Self { dim: self.dim, kind }
    }

    /// `E|X|²` in closed form.
    pub fn second_moment(&self) -> f64 {
        let d = self.dim as f64;
        match &self.kind {
            DistributionKind::UniformCube { half_width, center } => {
                let c2: f64 = center.iter().flatten().map(|c| c * c).sum();
                d * half_width * half_width / 3.0 + c2
            }
            DistributionKind::Gaussian { mean, scale } => {
                mean.iter().map(|m| m * m).sum::<f64>() + d * scale * scale
            }
            DistributionKind::GaussianMixture {
                means,
                scales,
                mixture_weights,
            } => means
                .iter()
                .zip(scales)
                .zip(mixture_weights)
                .map(|((m, s), w)| w * (m.iter().map(|a| a * a).sum::<f64>() + d * s * s))
                .sum(),
        }
    }

    /// Append one draw to `out`.
    pub fn draw_into(&self, rng: &mut StreamRng, out: &mut Vec<f64>) {
        match &self.kind {
            DistributionKind::UniformCube { half_width, center } => {
                for j in 0..self.dim {
                    let c = center.as_ref().map_or(0.0, |c| c[j]);
                    let u: f64 = rng.random_range(-1.0..=1.0);
                    out.push(c + half_width * u);
                }
            }
            DistributionKind::Gaussian { mean, scale } => {
                for m in mean {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + scale * z);
                }
            }
            DistributionKind::GaussianMixture {
                means,
                scales,
                mixture_weights,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut comp = mixture_weights.len() - 1;
                for (c, w) in mixture_weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        comp = c;
                        break;
                    }
                }
                for m in &means[comp] {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + scales[comp] * z);
                }
            }
        }
    }

    /// `n` i.i.d. draws as a uniform empirical measure.
    pub fn sample(&self, n: usize, seed: SeedSpec) -> Result<EmpiricalMeasure> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be >= 1".into()));
        }
        let mut rng = seed.rng();
        let mut points = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            self.draw_into(&mut rng, &mut points);
        }
        EmpiricalMeasure::uniform(points, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seed(s: u64) -> SeedSpec {
        SeedSpec::new(s, 0)
    }

    #[test]
    fn closed_form_means_and_centering() {
        let box_spec = DistributionSpec::uniform_box(2, 0.0, 1.0);
        assert_eq!(box_spec.mean(), vec![0.5, 0.5]);
        let mix = DistributionSpec::mixture(vec![vec![-1.0], vec![3.0]], vec![1.0, 1.0], vec![0.25, 0.75]);
        assert_eq!(mix.mean(), vec![2.0]);
        for spec in [box_spec, mix, DistributionSpec::gaussian(vec![1.0, -2.0], 0.5)] {
            let c = spec.centered();
            assert!(c.mean().iter().all(|m| m.abs() < 1e-15));
            let shift: f64 = spec.mean().iter().map(|m| m * m).sum();
            assert_abs_diff_eq!(c.second_moment(), spec.second_moment() - shift, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_malformed_measures() {
        assert!(EmpiricalMeasure::new(vec![], 1, vec![]).is_err());
        assert!(EmpiricalMeasure::new(vec![1.0, 2.0], 1, vec![0.5, 0.6]).is_err());
        assert!(EmpiricalMeasure::new(vec![1.0, 2.0, 3.0], 2, vec![1.0]).is_err());
        assert!(EmpiricalMeasure::new(vec![1.0, 2.0], 1, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn uniform_cube_support() {
        let spec = DistributionSpec::uniform_cube(2, 1.0);
        let m = spec.sample(3, seed(11)).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.coords().iter().all(|x| (-1.0..=1.0).contains(x)));
        assert_abs_diff_eq!(m.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DistributionSpec::gaussian(vec![0.0, 1.0], 2.0);
        assert_eq!(spec.sample(50, seed(3)).unwrap(), spec.sample(50, seed(3)).unwrap());
        assert_ne!(spec.sample(50, seed(3)).unwrap(), spec.sample(50, seed(4)).unwrap());
    }

    #[test]
    fn gaussian_mean_within_clt_bound() {
        let s = 2.5;
        let n = 100_000;
        let m = DistributionSpec::gaussian(vec![0.0, 0.0], s).sample(n, seed(5)).unwrap();
        let bound = 4.0 * s / (n as f64).sqrt();
        for c in m.mean() {
            assert!(c.abs() < bound, "{c} vs {bound}");
        }
    }

    #[test]
    fn malformed_mixture_is_invalid_spec() {
        let spec = DistributionSpec::mixture(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0], vec![0.7, 0.7]);
        assert!(matches!(spec.sample(4, seed(1)), Err(Error::InvalidSpec(_))));
        let spec = DistributionSpec::mixture(vec![vec![0.0]], vec![0.0], vec![1.0]);
        assert!(matches!(spec.sample(4, seed(1)), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn degenerate_mixture_matches_first_component() {
        // two-sample KS at the 1% level: c(α)·sqrt(2/n) with c = 1.628
        let n = 10_000;
        let mix = DistributionSpec::mixture(vec![vec![0.5], vec![4.0]], vec![1.0, 0.3], vec![1.0, 0.0]);
        let comp = DistributionSpec::gaussian(vec![0.5], 1.0);
        let mut a = mix.sample(n, seed(21)).unwrap().coords().to_vec();
        let mut b = comp.sample(n, seed(22)).unwrap().coords().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max((i as f64 - j as f64).abs() / n as f64);
        }
        let critical = 1.628 * (2.0 / n as f64).sqrt();
        assert!(ks < critical, "KS {ks} >= {critical}");
    }

    #[test]
    fn augment_with_tiny_noise_keeps_points() {
        let m = EmpiricalMeasure::from_rows(&[[0.5, -1.0], [2.0, 3.0]]).unwrap();
        let a = m.augment(1e-12, 1, seed(2)).unwrap();
        for (x, y) in m.coords().iter().zip(a.coords()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn augment_noise_variance() {
        let m = EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap();
        let a = m.augment(1.0, 10_000, seed(9)).unwrap();
        assert_eq!(a.len(), 10_000);
        let mean = a.mean();
        for j in 0..2 {
            let var = a.points().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / (a.len() - 1) as f64;
            assert!((0.94..=1.06).contains(&var), "variance {var}");
        }
    }

    #[test]
    fn augment_conserves_mass_and_count() {
        let m = EmpiricalMeasure::new(vec![0.0, 1.0, 5.0], 1, vec![0.2, 0.3, 0.5]).unwrap();
        for k in [1, 3, 17] {
            let a = m.augment(0.7, k, seed(k as u64)).unwrap();
            assert_eq!(a.len(), 3 * k);
            assert_abs_diff_eq!(a.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.weights()[k], 0.3 / k as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn augment_mean_converges() {
        let sigma = 0.8;
        let (n, k) = (10, 10_000);
        let m = DistributionSpec::uniform_cube(2, 1.0).sample(n, seed(1)).unwrap();
        let a = m.augment(sigma, k, seed(2)).unwrap();
        let bound = 5.0 * sigma / ((n * k) as f64).sqrt();
        for (x, y) in m.mean().iter().zip(a.mean()) {
            assert!((x - y).abs() <= bound);
        }
    }

    #[test]
    fn center_identities() {
        let m = DistributionSpec::gaussian(vec![1.0, -2.0], 1.0).sample(20, seed(4)).unwrap();
        assert_eq!(m.center(&[0.0, 0.0]).unwrap(), m);
        let c = m.center(&m.mean()).unwrap();
        for v in c.mean() {
            assert!(v.abs() < 1e-12);
        }
        let a = [0.25, -1.5];
        let b = [2.0, 0.125];
        let twice = m.center(&a).unwrap().center(&b).unwrap();
        let once = m.center(&[a[0] + b[0], a[1] + b[1]]).unwrap();
        assert_eq!(twice, once);
        assert!(matches!(m.center(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn moments_by_hand() {
        let p = EmpiricalMeasure::dirac(&[3.0, 4.0]).unwrap();
        assert_eq!(p.mean(), vec![3.0, 4.0]);
        assert_eq!(p.cov_trace(), 0.0);
        assert_eq!(p.second_moment(), 25.0);
        let two = EmpiricalMeasure::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        assert_eq!(two.mean(), vec![0.0, 0.0]);
        assert_eq!(two.cov_trace(), 1.0);
    }

    #[test]
    fn pool_weights() {
        let a = EmpiricalMeasure::dirac(&[1.0]).unwrap();
        let b = EmpiricalMeasure::dirac(&[2.0]).unwrap();
        let p = a.pool(&b).unwrap();
        assert_eq!(p.coords(), &[1.0, 2.0]);
        assert_eq!(p.weights(), &[0.5, 0.5]);
        let c = EmpiricalMeasure::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let q = a.pool(&c).unwrap();
        for w in q.weights() {
            assert_abs_diff_eq!(*w, 0.25, epsilon = 1e-15);
        }
        assert!(a.pool(&EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = EmpiricalMeasure::new(vec![0.1, 2.0, -3.5, 4.25], 2, vec![0.375, 0.625]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x1,x2,w\n"));
        let back = EmpiricalMeasure::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_rejects_bad_header() {
        let text = "a,b\n1,1\n";
        assert!(EmpiricalMeasure::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: DistributionSpec =
            serde_json::from_str(r#"{"kind":"gaussian","dim":2,"mean":[0,0],"scale":0.5}"#).unwrap();
        assert_eq!(spec, DistributionSpec::gaussian(vec![0.0, 0.0], 0.5));
        let cube: DistributionSpec =
            serde_json::from_str(r#"{"kind":"uniform_cube","dim":3,"half_width":1.0}"#).unwrap();
        assert_abs_diff_eq!(cube.second_moment(), 1.0, epsilon = 1e-15);
    }
}
