//! Column standardization and PCA, both fitted on training rows only.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

const SD_FLOOR: f64 = 1e-12;
pub const DEFAULT_VARIANCE_TARGET: f64 = 0.8;

/// Per-column z-scoring with population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &DMatrix<f64>) -> Result<Self> {
        let m = train.nrows();
        if m == 0 {
            return Err(Error::EmptyInput("training rows"));
        }
        let mut mean = Vec::with_capacity(train.ncols());
        let mut sd = Vec::with_capacity(train.ncols());
        for col in train.column_iter() {
            let mu = col.sum() / m as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m as f64;
            mean.push(mu);
            sd.push(var.sqrt());
        }
        Ok(Standardizer { mean, sd })
    }

    /// Columns whose training spread fell below the floor map to zero.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::dims(self.mean.len(), x.ncols()));
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.sd[j] < SD_FLOOR {
                0.0
            } else {
                (x[(i, j)] - self.mean[j]) / self.sd[j]
            }
        }))
    }
}

/// Principal component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `p × c`, orthonormal columns.
    pub components: DMatrix<f64>,
    /// Fraction of total variance carried by each retained component.
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    /// Keeps the fewest components whose cumulative explained variance
    /// reaches `variance_target`, never more than `m − 1`. Each component is
    /// signed so that its largest-magnitude loading is positive.
    pub fn fit(train: &DMatrix<f64>, variance_target: f64) -> Result<Self> {
        if !(variance_target > 0.0 && variance_target <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "variance target must lie in (0, 1], got {variance_target}"
            )));
        }
        let (m, p) = train.shape();
        if m < 2 {
            return Err(Error::TooFewSamples(format!("PCA needs at least 2 rows, got {m}")));
        }
        let mean: Vec<f64> = train.column_iter().map(|c| c.sum() / m as f64).collect();
        let centered = DMatrix::from_fn(m, p, |i, j| train[(i, j)] - mean[j]);
        let svd = SVD::new(centered, false, true);
        let v_t = svd.v_t.expect("requested Vᵀ");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

        let total: f64 = sv.iter().map(|s| s * s).sum();
        let max_c = (m - 1).min(sv.len()).max(1);
        let mut ratios = Vec::new();
        let mut cumulative = 0.0;
        for &i in order.iter().take(max_c) {
            let r = if total > 0.0 { sv[i] * sv[i] / total } else { 0.0 };
            ratios.push(r);
            cumulative += r;
            // Small slack so a target met exactly is not missed by rounding.
            if cumulative >= variance_target - 1e-12 {
                break;
            }
        }
        let c = ratios.len();
        let mut components = DMatrix::zeros(p, c);
        for (dst, &src) in order.iter().take(c).enumerate() {
            let mut v: DVector<f64> = v_t.row(src).transpose();
            let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                v.neg_mut();
            }
            components.set_column(dst, &v);
        }
        Ok(Pca {
            mean,
            components,
            explained_variance_ratio: ratios,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::dims(self.mean.len(), x.ncols()));
        }
        let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - self.mean[j]);
        Ok(centered * &self.components)
    }
}
