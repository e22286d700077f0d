use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{sigmoid, FitError, GRAD_TOL, MAX_ITER};

/// Aggregated binomial observation: `successes` out of `trials` at covariates `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialRow {
    pub x: Vec<f64>,
    pub successes: f64,
    pub trials: f64,
    /// Fixed additive term in the linear predictor.
    pub offset: f64,
}

impl BinomialRow {
    pub fn new(x: Vec<f64>, successes: f64, trials: f64) -> Self {
        Self { x, successes, trials, offset: 0.0 }
    }
}

/// Group Bernoulli outcomes by identical covariate vectors.
pub fn aggregate<I>(points: I) -> Vec<BinomialRow>
where
    I: IntoIterator<Item = (Vec<f64>, bool)>,
{
    let mut cells: BTreeMap<Vec<u64>, BinomialRow> = BTreeMap::new();
    for (x, y) in points {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let row = cells.entry(key).or_insert_with(|| BinomialRow::new(x, 0.0, 0.0));
        row.trials += 1.0;
        if y {
            row.successes += 1.0;
        }
    }
    cells.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// Intercept first, then one coefficient per covariate.
    pub coef: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Binomial log-likelihood at coefficients `coef` (intercept first).
pub fn log_likelihood(rows: &[BinomialRow], coef: &[f64]) -> f64 {
    rows.iter()
        .map(|r| {
            let eta = linear_predictor(r, coef);
            // y*eta - n*log(1+e^eta), computed without overflow
            r.successes * eta - r.trials * softplus(eta)
        })
        .sum()
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear_predictor(row: &BinomialRow, coef: &[f64]) -> f64 {
    row.offset + coef[0] + row.x.iter().zip(&coef[1..]).map(|(x, c)| x * c).sum::<f64>()
}

/// Maximum-likelihood logistic regression by damped Newton-Raphson.
///
/// Covariates are rescaled internally to unit max-magnitude; the returned
/// coefficients and gradient norm are in the original units. Does not test
/// for separation: callers do that first.
pub fn fit_logistic(rows: &[BinomialRow]) -> Result<LogisticFit, FitError> {
    let dim = rows.first().map(|r| r.x.len() + 1).ok_or(FitError::InsufficientPoints { needed: 1, got: 0 })?;
    if rows.iter().any(|r| r.x.len() + 1 != dim) {
        return Err(FitError::InvalidInput("ragged covariate rows".into()));
    }
    let mut scale = vec![1.0; dim];
    for j in 1..dim {
        let m = rows.iter().map(|r| r.x[j - 1].abs()).fold(0.0, f64::max);
        if m > 0.0 {
            scale[j] = m;
        }
    }
    let scaled: Vec<BinomialRow> = rows
        .iter()
        .map(|r| BinomialRow { x: r.x.iter().enumerate().map(|(j, v)| v / scale[j + 1]).collect(), ..r.clone() })
        .collect();

    let mut coef = vec![0.0; dim];
    let mut ll = log_likelihood(&scaled, &coef);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let (grad, hess) = grad_hess(&scaled, &coef);
        grad_norm = orig_grad_norm(&grad, &scale);
        if grad_norm < GRAD_TOL {
            break;
        }
        let step = solve(hess, grad.clone())
            .ok_or_else(|| FitError::RankDeficient { detail: "singular information matrix".into() })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = coef.iter().zip(&step).map(|(c, s)| c + t * s).collect();
            let trial_ll = log_likelihood(&scaled, &trial);
            if trial_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                coef = trial;
                ll = trial_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (grad, _) = grad_hess(&scaled, &coef);
    grad_norm = grad_norm.min(orig_grad_norm(&grad, &scale));
    // Gradient below tolerance, or stalled at machine precision near the optimum.
    let converged = grad_norm < GRAD_TOL || grad_norm < 1e-6 * (1.0 + ll.abs());
    if !converged {
        return Err(FitError::NonConvergence { iterations, residual: grad_norm });
    }
    let coef: Vec<f64> = coef.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let log_likelihood = log_likelihood(rows, &coef);
    Ok(LogisticFit { coef, log_likelihood, iterations, grad_norm, converged })
}

fn orig_grad_norm(grad: &[f64], scale: &[f64]) -> f64 {
    grad.iter().zip(scale).map(|(g, s)| (g / s).powi(2)).sum::<f64>().sqrt()
}

fn grad_hess(rows: &[BinomialRow], coef: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dim = coef.len();
    let mut grad = vec![0.0; dim];
    let mut hess = vec![vec![0.0; dim]; dim];
    for r in rows {
        let p = sigmoid(linear_predictor(r, coef));
        let resid = r.successes - r.trials * p;
        let w = r.trials * p * (1.0 - p);
        let mut z = Vec::with_capacity(dim);
        z.push(1.0);
        z.extend_from_slice(&r.x);
        for a in 0..dim {
            grad[a] += resid * z[a];
            for b in 0..dim {
                hess[a][b] += w * z[a] * z[b];
            }
        }
    }
    (grad, hess)
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * norm.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_balanced_data_has_zero_intercept() {
        // Mirror-image frequencies around x = 0.
        let rows: Vec<BinomialRow> = [(-3.0, 2.0), (-1.0, 4.0), (1.0, 6.0), (3.0, 8.0)]
            .iter()
            .map(|&(x, k)| BinomialRow::new(vec![x], k, 10.0))
            .collect();
        let fit = fit_logistic(&rows).unwrap();
        assert_abs_diff_eq!(fit.coef[0], 0.0, epsilon = 1e-6);
        assert!(fit.coef[1] > 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn intercept_only_matches_log_odds() {
        let rows = vec![BinomialRow::new(vec![], 30.0, 100.0)];
        let fit = fit_logistic(&rows).unwrap();
        assert_abs_diff_eq!(fit.coef[0], (0.3f64 / 0.7).ln(), epsilon = 1e-9);
    }

    #[test]
    fn aggregate_groups_identical_covariates() {
        let rows = aggregate(vec![(vec![1.0], true), (vec![1.0], false), (vec![2.0], true)]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].trials, 2.0);
        assert_eq!(rows[0].successes, 1.0);
    }

    #[test]
    fn solve_detects_singular_system() {
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-12);
    }
}
