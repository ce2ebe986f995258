//! Two-class linear discriminant analysis with covariance shrinkage.

use nalgebra::{DMatrix, DVector};

use crate::cohort::Label;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymmetricMatrix};

pub const DEFAULT_SHRINKAGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// `Σ_reg⁻¹ (μ_B − μ_A)`.
    pub direction: DVector<f64>,
    /// Projection of the midpoint of the class means.
    pub threshold: f64,
}

impl LdaModel {
    /// `directionᵀx − threshold`; positive means class `B`.
    pub fn decision(&self, x: &DMatrix<f64>) -> DVector<f64> {
        (x * &self.direction).map(|v| v - self.threshold)
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<Label> {
        self.decision(x)
            .iter()
            .map(|&s| if s > 0.0 { Label::B } else { Label::A })
            .collect()
    }
}

/// Pooled covariance (denominator `m − 2`) shrunk towards `(tr Σ / p) I`.
pub fn lda_fit(x: &DMatrix<f64>, labels: &[Label], shrinkage: f64) -> Result<LdaModel> {
    let (m, p) = x.shape();
    if labels.len() != m {
        return Err(Error::dims(m, labels.len()));
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::InvalidInput(format!("shrinkage must lie in [0, 1], got {shrinkage}")));
    }
    let idx_b: Vec<usize> = (0..m).filter(|&i| labels[i].is_positive()).collect();
    let idx_a: Vec<usize> = (0..m).filter(|&i| !labels[i].is_positive()).collect();
    for (group, idx) in [("A", &idx_a), ("B", &idx_b)] {
        if idx.is_empty() {
            return Err(Error::DegenerateGroup { group, size: 0, required: 1 });
        }
    }
    let mean_of = |idx: &[usize]| -> DVector<f64> {
        let mut mu = DVector::zeros(p);
        for &i in idx {
            mu += x.row(i).transpose();
        }
        mu / idx.len() as f64
    };
    let (mu_a, mu_b) = (mean_of(&idx_a), mean_of(&idx_b));

    let mut centered = DMatrix::zeros(m, p);
    for i in 0..m {
        let mu = if labels[i].is_positive() { &mu_b } else { &mu_a };
        centered.set_row(i, &(x.row(i) - mu.transpose()));
    }
    let dof = m.saturating_sub(2).max(1) as f64;
    let sigma = centered.transpose() * &centered / dof;
    let avg_var = sigma.trace() / p.max(1) as f64;
    let mut reg = sigma * (1.0 - shrinkage);
    for j in 0..p {
        reg[(j, j)] += shrinkage * avg_var;
    }
    let max_diag = (0..p).map(|j| reg[(j, j)]).fold(0.0, f64::max);
    let l = cholesky(&SymmetricMatrix::symmetric_part(reg)).map_err(|_| Error::SingularCovariance)?;
    // Pivots at rounding level mean the covariance is numerically singular.
    if (0..p).any(|j| l[(j, j)] * l[(j, j)] <= 1e-12 * max_diag) {
        return Err(Error::SingularCovariance);
    }
    let diff = &mu_b - &mu_a;
    let z = l.solve_lower_triangular(&diff).ok_or(Error::SingularCovariance)?;
    let direction = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or(Error::SingularCovariance)?;
    let threshold = direction.dot(&((&mu_a + &mu_b) * 0.5));
    Ok(LdaModel { direction, threshold })
}
