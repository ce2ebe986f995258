//! The Off–log chart and the Lie group structure it induces.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::{CorrelationMatrix, HollowSymmetricMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen, SymmetricMatrix};

/// Convergence tolerance on `max_i |diag(exp(S + D))_i − 1|`.
pub const DIAG_CORRECTION_TOL: f64 = 1e-12;
pub const DIAG_CORRECTION_MAX_ITER: usize = 100;

/// Number of past iterates kept for Anderson mixing.
const ANDERSON_DEPTH: usize = 5;
/// A residual this many times larger than the last one drops the history.
const RESTART_GROWTH: f64 = 10.0;

/// Diagonal correction `D(S)` and how it was reached.
#[derive(Debug, Clone)]
pub struct DiagCorrection {
    pub diagonal: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// `Off(log C)`.
pub fn log_off(c: &CorrelationMatrix) -> Result<HollowSymmetricMatrix> {
    let log = linalg::sym_logm(&c.to_symmetric())?;
    Ok(HollowSymmetricMatrix::off_diagonal_of(log.as_matrix()))
}

/// Finds the diagonal `D` with `diag(exp(S + D)) = 1`.
///
/// Iterates `d ← d − log diag(exp(S + Diag d))` from `d = 0` with Anderson
/// mixing over the last few iterates; the plain step is used whenever the
/// history is empty or has just been reset.
pub fn solve_diag_correction(
    s: &HollowSymmetricMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<DiagCorrection> {
    solve_with_eigen(s, tol, max_iter).map(|(d, _)| d)
}

fn solve_with_eigen(
    s: &HollowSymmetricMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(DiagCorrection, SymEigen)> {
    let n = s.dim();
    if s.upper().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite hollow matrix entry".into()));
    }
    let base = s.to_symmetric();
    let mut d = vec![0.0; n];
    // Anderson history of (f_k, g_k) with f = g − d the fixed-point step.
    let mut history: VecDeque<(DVector<f64>, DVector<f64>)> = VecDeque::new();
    let mut last_residual = f64::INFINITY;

    for iteration in 0..=max_iter {
        let eig = linalg::sym_eig(&base.add_diagonal(&d))?;
        let log_diag = log_diag_of_exp(&eig);
        let residual = log_diag
            .iter()
            .map(|l| l.exp_m1().abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::NoConvergence {
                what: "diagonal correction",
                iterations: iteration,
                residual,
            });
        }
        if residual <= tol {
            let result = DiagCorrection {
                diagonal: d,
                iterations: iteration,
                residual,
            };
            return Ok((result, eig));
        }
        if iteration == max_iter {
            return Err(Error::NoConvergence {
                what: "diagonal correction",
                iterations: iteration,
                residual,
            });
        }

        if residual > RESTART_GROWTH * last_residual {
            history.clear();
        }
        last_residual = residual;

        let f = DVector::from_iterator(n, log_diag.iter().map(|l| -l));
        let g = DVector::from_column_slice(&d) + &f;
        history.push_back((f.clone(), g.clone()));
        if history.len() > ANDERSON_DEPTH + 1 {
            history.pop_front();
        }
        let next = anderson_step(&history).unwrap_or(g);
        d = next.iter().copied().collect();
    }
    unreachable!("loop returns on its last iteration")
}

/// `log diag(V e^Λ Vᵀ)`, evaluated with a max shift so large spectra do not overflow.
fn log_diag_of_exp(eig: &SymEigen) -> Vec<f64> {
    let n = eig.eigenvalues.len();
    let shift = eig.max();
    (0..n)
        .map(|i| {
            let sum: f64 = (0..n)
                .map(|a| {
                    let v = eig.eigenvectors[(i, a)];
                    v * v * (eig.eigenvalues[a] - shift).exp()
                })
                .sum();
            shift + sum.ln()
        })
        .collect()
}

/// Type-II Anderson update `g_k − ΔG γ` with `γ = argmin ‖f_k − ΔF γ‖`.
fn anderson_step(history: &VecDeque<(DVector<f64>, DVector<f64>)>) -> Option<DVector<f64>> {
    let m = history.len().checked_sub(1).filter(|&m| m > 0)?;
    let n = history[0].0.len();
    let (f_last, g_last) = history.back()?;
    let mut df = DMatrix::zeros(n, m);
    let mut dg = DMatrix::zeros(n, m);
    for j in 0..m {
        df.set_column(j, &(&history[j + 1].0 - &history[j].0));
        dg.set_column(j, &(&history[j + 1].1 - &history[j].1));
    }
    let svd = df.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    let gamma = svd.solve(f_last, eps).ok()?;
    let next = g_last - dg * gamma;
    next.iter().all(|v| v.is_finite()).then_some(next)
}

/// `exp(S + D(S))`: the correlation matrix with Off–log coordinates `S`.
pub fn exp_off(s: &HollowSymmetricMatrix) -> Result<CorrelationMatrix> {
    let (_, eig) = solve_with_eigen(s, DIAG_CORRECTION_TOL, DIAG_CORRECTION_MAX_ITER)?;
    let c = eig.apply(f64::exp).into_inner();
    Ok(CorrelationMatrix::from_spd_normalized(c))
}

/// Group product `C1 ⋆ C2 = Exp_off(Log_off C1 + Log_off C2)`.
pub fn star_product(c1: &CorrelationMatrix, c2: &CorrelationMatrix) -> Result<CorrelationMatrix> {
    exp_off(&log_off(c1)?.add(&log_off(c2)?)?)
}

/// Group inverse `Exp_off(−Log_off C)`.
pub fn star_inverse(c: &CorrelationMatrix) -> Result<CorrelationMatrix> {
    exp_off(&log_off(c)?.scaled(-1.0))
}

#[allow(dead_code)]
pub(crate) fn expm_with_correction(s: &HollowSymmetricMatrix, d: &[f64]) -> Result<SymmetricMatrix> {
    linalg::sym_expm(&s.to_symmetric().add_diagonal(d))
}
