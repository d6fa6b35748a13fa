//! The entire exponential integral and the smooth Sobolev reproducing kernel.
//!
//! `Ein(z) = Σ_{k≥1} (-1)^{k+1} z^k / (k·k!)` is entire, but the series is only
//! usable in floating point where its terms do not cancel. Evaluation is split
//! into three regions:
//!
//! * `-40 ≤ z ≤ 2`: the power series. For negative `z` every term has the same
//!   sign, so there is no cancellation anywhere in this range.
//! * `z > 2`: `Ein(z) = γ + ln z + E1(z)` with `E1` from its continued fraction.
//! * `-690 ≤ z < -40`: `Ein(z) = γ + ln|z| − Ei(|z|)` with the asymptotic series of `Ei`.
//!
//! Below `-690` the result would be within a few orders of magnitude of `f64::MAX`
//! and [`Error::Overflow`] is returned instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Largest `|z|` accepted for negative arguments of [`ein`].
pub const OVERFLOW_THRESHOLD: f64 = 690.0;

const NEGATIVE_SERIES_LIMIT: f64 = 40.0;
const POSITIVE_SERIES_LIMIT: f64 = 2.0;
const SERIES_REL_TOL: f64 = 1e-16;
const MAX_SERIES_TERMS: usize = 500;
const MAX_CF_ITERS: usize = 1000;

/// Smoothing parameter of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KernelParams {
    sigma: f64,
}

impl KernelParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl TryFrom<f64> for KernelParams {
    type Error = Error;

    fn try_from(sigma: f64) -> Result<Self> {
        Self::new(sigma)
    }
}

impl From<KernelParams> for f64 {
    fn from(p: KernelParams) -> f64 {
        p.sigma
    }
}

/// Entire exponential integral `Ein(z)`.
pub fn ein(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite(z));
    }
    if z < -OVERFLOW_THRESHOLD {
        return Err(Error::Overflow(format!(
            "Ein({z}) exceeds the floating range (|z| > {OVERFLOW_THRESHOLD})"
        )));
    }
    let value = if z > POSITIVE_SERIES_LIMIT {
        ein_continued_fraction(z)
    } else if z < -NEGATIVE_SERIES_LIMIT {
        ein_asymptotic(z)
    } else {
        ein_series(z)
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("Ein({z}) is not representable")))
    }
}

/// Power-series branch. Accurate wherever its terms do not cancel: all of
/// `z ≤ 0` and small positive `z`.
pub fn ein_series(z: f64) -> f64 {
    // a_k = (-1)^{k+1} z^k / k!, term_k = a_k / k
    let mut a = z;
    let mut sum = z;
    for k in 2..=MAX_SERIES_TERMS {
        a *= -z / k as f64;
        let term = a / k as f64;
        sum += term;
        if term.abs() <= SERIES_REL_TOL * sum.abs() {
            break;
        }
    }
    sum
}

/// Large-argument branch built on the divergent asymptotic expansions of
/// `E1` (positive `z`) and `Ei` (negative `z`), truncated at the smallest term.
/// Accurate to roughly `e^{-|z|}` relative error.
pub fn ein_asymptotic(z: f64) -> f64 {
    let x = z.abs();
    if z > 0.0 {
        EULER_GAMMA + x.ln() + (-x).exp() / x * asymptotic_sum(x, -1.0)
    } else {
        EULER_GAMMA + x.ln() - x.exp() / x * asymptotic_sum(x, 1.0)
    }
}

/// Positive-argument branch, `γ + ln z + E1(z)` with the continued fraction for `E1`.
/// Valid for `z ≥ 1`.
pub fn ein_continued_fraction(z: f64) -> f64 {
    EULER_GAMMA + z.ln() + e1_continued_fraction(z)
}

/// `Σ_k sign^k k!/x^k`, stopped once terms stop shrinking.
fn asymptotic_sum(x: f64, sign: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * sign * k / x;
        if next.abs() >= term.abs() || next.abs() < f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum
}

/// Modified Lentz evaluation of `E1(x) = e^{-x} / (x+1 - 1²/(x+3 - 2²/(x+5 - ...)))`.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_CF_ITERS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}

/// Kernel value from an inner product, `-σ² Ein(-⟨x,y⟩/σ²)`.
pub fn kernel_from_inner(inner: f64, params: KernelParams) -> Result<f64> {
    let s2 = params.sigma * params.sigma;
    let t = inner / s2;
    if t > OVERFLOW_THRESHOLD {
        return Err(Error::Overflow(format!(
            "kernel argument <x,y>/sigma^2 = {t} exceeds {OVERFLOW_THRESHOLD}"
        )));
    }
    Ok(-s2 * ein(-t)?)
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Smooth Sobolev reproducing kernel `κ^(σ)(x, y)`.
pub fn kernel(x: &[f64], y: &[f64], params: KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    kernel_from_inner(dot(x, y), params)
}

/// Gram matrix `G[i][j] = κ(points[i], points[j])`.
///
/// Rows are assembled in parallel; each entry is computed independently, so the
/// result does not depend on the number of workers.
pub fn gram<P: AsRef<[f64]> + Sync>(points: &[P], params: KernelParams) -> Result<Matrix> {
    let n = points.len();
    if let Some(first) = points.first() {
        let d = first.as_ref().len();
        if let Some(bad) = points.iter().find(|p| p.as_ref().len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.as_ref().len(),
            });
        }
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = points[i].as_ref();
            (i..n)
                .map(|j| kernel_from_inner(dot(xi, points[j].as_ref()), params))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut g = Matrix::zeros(n, n);
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    Ok(g)
}

/// Rectangular cross-kernel matrix `K[i][j] = κ(xs[i], ys[j])`.
pub fn cross_gram<P: AsRef<[f64]> + Sync, Q: AsRef<[f64]> + Sync>(
    xs: &[P],
    ys: &[Q],
    params: KernelParams,
) -> Result<Matrix> {
    let cols = ys.len();
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| {
            ys.iter()
                .map(|y| kernel(x.as_ref(), y.as_ref(), params))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Matrix::from_vec(
        xs.len(),
        cols,
        rows.into_iter().flatten().collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(s: f64) -> KernelParams {
        KernelParams::new(s).unwrap()
    }

    #[test]
    fn ein_at_zero_is_zero() {
        assert_eq!(ein(0.0).unwrap(), 0.0);
    }

    #[test]
    fn ein_rejects_non_finite() {
        assert!(matches!(ein(f64::NAN), Err(Error::NonFinite(_))));
        assert!(matches!(ein(f64::INFINITY), Err(Error::NonFinite(_))));
        assert!(matches!(ein(f64::NEG_INFINITY), Err(Error::NonFinite(_))));
    }

    #[test]
    fn ein_overflows_past_threshold() {
        assert!(matches!(ein(-691.0), Err(Error::Overflow(_))));
        assert!(ein(-689.0).unwrap().is_finite());
        // positive side only grows like ln z
        assert!(ein(1e6).unwrap().is_finite());
    }

    #[test]
    fn ein_small_values() {
        // frozen from the 200-term fixed-point oracle in tests/specialfn_oracle.rs
        assert_relative_eq!(ein(1.0).unwrap(), 0.796_599_599_297_053_1, max_relative = 1e-14);
        assert_relative_eq!(ein(-1.0).unwrap(), -1.317_902_151_454_403_9, max_relative = 1e-14);
        assert!(ein(-1.0).unwrap() < 0.0);
    }

    #[test]
    fn kernel_dimension_mismatch() {
        let err = kernel(&[1.0, 2.0], &[1.0], params(1.0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn kernel_with_origin_is_zero() {
        for s in [0.1, 1.0, 7.0] {
            assert_eq!(kernel(&[3.0, -2.0], &[0.0, 0.0], params(s)).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernel_unit_point() {
        let k = kernel(&[1.0], &[1.0], params(1.0)).unwrap();
        assert_relative_eq!(k, -ein(-1.0).unwrap(), max_relative = 1e-15);
        assert!(k > 0.0);
    }

    #[test]
    fn kernel_overflow_is_reported() {
        let err = kernel(&[30.0], &[30.0], params(1.0)).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn kernel_large_sigma_expansion() {
        // remainder after ⟨x,y⟩ + ⟨x,y⟩²/(4σ²) shrinks like σ⁻⁴
        let x = [0.7, -0.4, 1.1];
        let y = [0.9, 0.3, 0.8];
        let ip = dot(&x, &y);
        let remainder = |s: f64| {
            let k = kernel(&x, &y, params(s)).unwrap();
            (k - ip - ip * ip / (4.0 * s * s)).abs()
        };
        let r10 = remainder(10.0);
        let r20 = remainder(20.0);
        let r40 = remainder(40.0);
        let order1 = (r10 / r20).log2();
        let order2 = (r20 / r40).log2();
        assert!((order1 - 4.0).abs() < 0.1, "order {order1}");
        assert!((order2 - 4.0).abs() < 0.2, "order {order2}");
    }

    #[test]
    fn gram_single_origin() {
        let g = gram(&[vec![0.0, 0.0]], params(1.0)).unwrap();
        assert_eq!(g.as_slice(), &[0.0]);
    }

    #[test]
    fn gram_origin_and_unit_vector() {
        let g = gram(&[vec![0.0], vec![1.0]], params(1.0)).unwrap();
        let e = -ein(-1.0).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(1, 0), 0.0);
        assert_relative_eq!(g.get(1, 1), e, max_relative = 1e-15);
    }

    #[test]
    fn gram_rejects_ragged_points() {
        let pts = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(gram(&pts, params(1.0)).is_err());
    }

    #[test]
    fn kernel_params_validation() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(-1.0).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
    }

    #[test]
    fn positive_branches_agree_near_switch() {
        for z in [2.0, 2.5, 3.0, 5.0] {
            assert_relative_eq!(ein_series(z), ein_continued_fraction(z), max_relative = 1e-13);
        }
    }
}
