//! Elastic Net regression by cyclic coordinate descent.
//!
//! Minimizes `(1/2m)‖y − β₀ − Xβ‖² + λ(α‖β‖₁ + (1−α)/2 ‖β‖²)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticNetOptions {
    pub lambda: f64,
    /// Mixing weight `α` of the L1 term.
    pub l1_ratio: f64,
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    pub max_iter: usize,
}

impl ElasticNetOptions {
    pub fn new(lambda: f64, l1_ratio: f64) -> Self {
        ElasticNetOptions {
            lambda,
            l1_ratio,
            tol: 1e-7,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetModel {
    pub coefficients: DVector<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ElasticNetModel {
    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.coefficients + DVector::from_element(x.nrows(), self.intercept)
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn elastic_net_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    options: &ElasticNetOptions,
) -> Result<ElasticNetModel> {
    let (m, p) = x.shape();
    if y.len() != m {
        return Err(Error::dims(m, y.len()));
    }
    if m == 0 {
        return Err(Error::EmptyInput("regression samples"));
    }
    let ElasticNetOptions { lambda, l1_ratio, tol, max_iter } = *options;
    if !(lambda >= 0.0) || !(0.0..=1.0).contains(&l1_ratio) {
        return Err(Error::InvalidInput(format!(
            "need lambda >= 0 and l1_ratio in [0, 1], got {lambda}, {l1_ratio}"
        )));
    }
    let mf = m as f64;
    let x_mean: Vec<f64> = x.column_iter().map(|c| c.sum() / mf).collect();
    let y_mean = y.sum() / mf;
    let xc = DMatrix::from_fn(m, p, |i, j| x[(i, j)] - x_mean[j]);
    let mut residual = y.map(|v| v - y_mean);
    let z: Vec<f64> = xc.column_iter().map(|c| c.norm_squared() / mf).collect();
    let l1 = lambda * l1_ratio;
    let l2 = lambda * (1.0 - l1_ratio);

    let mut beta = DVector::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut max_change = 0.0f64;
        for j in 0..p {
            let denom = z[j] + l2;
            let old = beta[j];
            let col = xc.column(j);
            let rho = col.dot(&residual) / mf + z[j] * old;
            let new = if denom > 0.0 { soft_threshold(rho, l1) / denom } else { 0.0 };
            if new != old {
                residual.axpy(old - new, &col, 1.0);
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change <= tol {
            converged = true;
            break;
        }
    }
    let intercept = y_mean - x_mean.iter().zip(beta.iter()).map(|(a, b)| a * b).sum::<f64>();
    Ok(ElasticNetModel {
        coefficients: beta,
        intercept,
        iterations,
        converged,
    })
}

/// Largest violation of the optimality conditions, in the scale of the gradient.
pub fn kkt_residual(model: &ElasticNetModel, x: &DMatrix<f64>, y: &DVector<f64>, options: &ElasticNetOptions) -> f64 {
    let m = x.nrows() as f64;
    let r = y - model.predict(x);
    let l1 = options.lambda * options.l1_ratio;
    let l2 = options.lambda * (1.0 - options.l1_ratio);
    let mut worst = (r.sum() / m).abs();
    for j in 0..x.ncols() {
        let b = model.coefficients[j];
        let g = -x.column(j).dot(&r) / m + l2 * b;
        let v = if b > 0.0 {
            (g + l1).abs()
        } else if b < 0.0 {
            (g - l1).abs()
        } else {
            (g.abs() - l1).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}
