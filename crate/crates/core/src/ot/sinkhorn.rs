//! Log-domain Sinkhorn iterations with epsilon scaling and a final rounding onto
//! the transport polytope.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub(crate) struct EntropicSolution {
    pub plan: Matrix,
}

/// Entropic OT between strictly positive marginals `a`, `b`.
pub(crate) fn solve(
    a: &[f64],
    b: &[f64],
    cost: &Matrix,
    epsilon: f64,
    max_iter: usize,
    tol: f64,
) -> Result<EntropicSolution> {
    let (m, n) = (a.len(), b.len());
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut err = f64::INFINITY;

    // epsilon scaling: warm-start the target epsilon from a coarse schedule
    let max_cost = cost.as_slice().iter().fold(0.0f64, |a, v| a.max(*v));
    let mut schedule = Vec::new();
    let mut e = epsilon;
    while e < max_cost {
        schedule.push(e);
        e *= 2.0;
    }
    schedule.reverse();
    let target_stage = schedule.len().saturating_sub(1);
    if schedule.is_empty() {
        schedule.push(epsilon);
    }

    let mut used = 0usize;
    for (stage, &eps) in schedule.iter().enumerate() {
        let last = stage == target_stage || schedule.len() == 1;
        let stage_tol = if last { tol } else { tol.max(1e-3) };
        let budget = if last { max_iter.saturating_sub(used) } else { 200 };
        for _ in 0..budget {
            used += 1;
            for i in 0..m {
                let row = cost.row(i);
                let lse = logsumexp((0..n).map(|j| (g[j] - row[j]) / eps));
                f[i] = eps * (log_a[i] - lse);
            }
            for j in 0..n {
                let lse = logsumexp((0..m).map(|i| (f[i] - cost.get(i, j)) / eps));
                g[j] = eps * (log_b[j] - lse);
            }
            // columns are exact after the g-update; measure the row marginals
            err = (0..m)
                .map(|i| {
                    let row = cost.row(i);
                    let r: f64 = (0..n).map(|j| ((f[i] + g[j] - row[j]) / eps).exp()).sum();
                    (r - a[i]).abs()
                })
                .sum();
            if err <= stage_tol {
                break;
            }
        }
        if last && err <= tol {
            let mut plan = Matrix::zeros(m, n);
            for i in 0..m {
                let row = cost.row(i);
                for j in 0..n {
                    plan.set(i, j, ((f[i] + g[j] - row[j]) / eps).exp());
                }
            }
            round_to_marginals(&mut plan, a, b);
            return Ok(EntropicSolution { plan });
        }
    }
    Err(Error::NonConvergence {
        iterations: used,
        error: err,
    })
}

/// Project an approximately feasible plan onto `Π(a, b)`: shrink rows and
/// columns that exceed their marginal, then add the rank-one deficit.
fn round_to_marginals(plan: &mut Matrix, a: &[f64], b: &[f64]) {
    let (m, n) = (plan.rows(), plan.cols());
    let rows = plan.row_sums();
    for i in 0..m {
        if rows[i] > a[i] {
            let s = a[i] / rows[i];
            for j in 0..n {
                plan.set(i, j, plan.get(i, j) * s);
            }
        }
    }
    let cols = plan.col_sums();
    for j in 0..n {
        if cols[j] > b[j] {
            let s = b[j] / cols[j];
            for i in 0..m {
                plan.set(i, j, plan.get(i, j) * s);
            }
        }
    }
    let rows = plan.row_sums();
    let cols = plan.col_sums();
    let dr: Vec<f64> = a.iter().zip(&rows).map(|(x, r)| (x - r).max(0.0)).collect();
    let dc: Vec<f64> = b.iter().zip(&cols).map(|(x, c)| (x - c).max(0.0)).collect();
    let total: f64 = dr.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan.set(i, j, plan.get(i, j) + dr[i] * dc[j] / total);
            }
        }
    }
}
