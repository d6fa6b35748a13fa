//! Small summary statistics used by the experiment tables.

use serde::{Deserialize, Serialize};

/// Sample mean and standard error of the mean; `None` for an empty slice.
pub fn mean_and_se(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, f64::NAN));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Some((mean, (var / n as f64).sqrt()))
}

/// Sample standard deviation (`n − 1` denominator).
pub fn std_dev(values: &[f64]) -> f64 {
    match mean_and_se(values) {
        Some((_, se)) => se * (values.len() as f64).sqrt(),
        None => f64::NAN,
    }
}

/// Linear-interpolated quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

/// Weighted least squares `y = a + b x` with weights `w`.
pub fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<SlopeFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .zip(w)
            .map(|((a, c), b)| b * (c - intercept - slope * a).powi(2))
            .sum();
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(SlopeFit {
        slope,
        intercept,
        slope_se,
        points: n,
    })
}

/// Log-log slope of `means` against `ns`, weighting each point by
/// `(mean / se)²`, the inverse delta-method variance of `ln mean`.
/// Falls back to equal weights when a standard error is zero or missing.
pub fn loglog_slope(ns: &[usize], means: &[f64], ses: &[f64]) -> Option<SlopeFit> {
    let keep: Vec<usize> = (0..ns.len()).filter(|&i| means[i] > 0.0 && means[i].is_finite()).collect();
    let x: Vec<f64> = keep.iter().map(|&i| (ns[i] as f64).ln()).collect();
    let y: Vec<f64> = keep.iter().map(|&i| means[i].ln()).collect();
    let usable = keep.iter().all(|&i| ses[i].is_finite() && ses[i] > 0.0);
    let w: Vec<f64> = if usable {
        keep.iter().map(|&i| (means[i] / ses[i]).powi(2)).collect()
    } else {
        vec![1.0; keep.len()]
    };
    weighted_line(&x, &y, &w)
}

/// Silverman's rule-of-thumb bandwidth `0.9·min(sd, IQR/1.34)·n^{-1/5}`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let sd = std_dev(values);
    let iqr = quantile(values, 0.75) - quantile(values, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * n.powf(-0.2);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1e-3
    }
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|g| {
            values
                .iter()
                .map(|v| (-0.5 * ((g - v) / bandwidth).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// `points` equally spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
