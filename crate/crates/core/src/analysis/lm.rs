//! Levenberg-Marquardt least squares with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// 1σ uncertainties from the covariance scaled by the residual variance.
    pub sigmas: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual sum of squares after every accepted step, starting point first.
    pub rss_history: Vec<f64>,
}

fn rss_of<F: Fn(&[f64], f64) -> f64>(model: &F, p: &[f64], x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let r = (yi - model(p, xi)) * wi;
            r * r
        })
        .sum()
}

fn jacobian<F: Fn(&[f64], f64) -> f64>(
    model: &F,
    p: &[f64],
    free: &[usize],
    x: &[f64],
    w: &[f64],
) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(x.len(), free.len());
    let mut q = p.to_vec();
    for (col, &k) in free.iter().enumerate() {
        let h = 1e-6 * p[k].abs().max(1e-6);
        q[k] = p[k] + h;
        let up: Vec<f64> = x.iter().map(|&xi| model(&q, xi)).collect();
        q[k] = p[k] - h;
        for (row, (&xi, u)) in x.iter().zip(&up).enumerate() {
            j[(row, col)] = (u - model(&q, xi)) / (2.0 * h) * w[row];
        }
        q[k] = p[k];
    }
    j
}

/// Minimizes Σ wᵢ²·(yᵢ − model(p, xᵢ))² over the parameters not marked fixed.
pub fn levenberg_marquardt<F>(
    model: F,
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
    start: &[f64],
    fixed: &[bool],
) -> LmOutcome
where
    F: Fn(&[f64], f64) -> f64,
{
    let ones = vec![1.0; x.len()];
    let w = weights.unwrap_or(&ones);
    let free: Vec<usize> = (0..start.len()).filter(|&k| !fixed.get(k).copied().unwrap_or(false)).collect();
    let mut p = start.to_vec();
    let mut rss = rss_of(&model, &p, x, y, w);
    let mut history = vec![rss];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && !free.is_empty() {
        iterations += 1;
        let j = jacobian(&model, &p, &free, x, w);
        let r = DVector::from_iterator(
            x.len(),
            x.iter().zip(y).zip(w).map(|((&xi, &yi), &wi)| (yi - model(&p, xi)) * wi),
        );
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p.clone();
            for (col, &k) in free.iter().enumerate() {
                trial[k] += step[col];
            }
            let trial_rss = rss_of(&model, &trial, x, y, w);
            if trial_rss.is_finite() && trial_rss <= rss {
                let small_step = free
                    .iter()
                    .enumerate()
                    .all(|(col, &k)| step[col].abs() <= 1e-10 * (p[k].abs() + 1e-10));
                let small_gain = rss - trial_rss <= 1e-14 * rss.max(1e-300);
                p = trial;
                rss = trial_rss;
                history.push(rss);
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: p is a local minimum
            converged = true;
        }
        if converged {
            break;
        }
    }
    if free.is_empty() {
        converged = true;
    }

    let mut sigmas = vec![0.0; p.len()];
    let dof = x.len().saturating_sub(free.len());
    if !free.is_empty() && dof > 0 {
        let j = jacobian(&model, &p, &free, x, w);
        if let Some(cov) = (j.transpose() * &j).try_inverse() {
            let s2 = rss / dof as f64;
            for (col, &k) in free.iter().enumerate() {
                sigmas[k] = (cov[(col, col)].max(0.0) * s2).sqrt();
            }
        }
    }
    LmOutcome {
        params: p,
        sigmas,
        rss,
        iterations,
        converged,
        rss_history: history,
    }
}
