//! Supervised pipelines on vectorized connectivity: preprocessing, linear
//! models, metrics, and nested stratified cross-validation.

pub mod anova;
pub mod cv;
pub mod elastic_net;
pub mod lda;
pub mod metrics;
pub mod pipelines;
pub mod preprocess;
pub mod svm;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cohort::CohortDataset;
use crate::corr::{embed, Metric};
use crate::error::{Error, Result};

pub use anova::{anova_f_scores, anova_f_select, AnovaSelection};
pub use cv::{make_cv_plan, CVPlan, Fold, Strata, DEFAULT_FOLDS};
pub use elastic_net::{elastic_net_fit, ElasticNetModel, ElasticNetOptions};
pub use lda::{lda_fit, LdaModel};
pub use metrics::{auc, binary_metrics, mae, r_squared, BinaryMetrics};
pub use pipelines::{
    run_brainage, run_classification, run_grassmann_pipeline, run_subspace_pipeline,
    BrainAgeConfig, CVReport, ClassificationConfig, FoldReport, GrassmannConfig, GrassmannReport,
    MeanSd, ModelSummary,
};
pub use preprocess::{Pca, Standardizer, DEFAULT_VARIANCE_TARGET};
pub use svm::{linear_svm_fit, SvmModel, SvmOptions};

/// Samples in rows, features in columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: DMatrix<f64>,
    pub feature_names: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(FeatureMatrix {
            values,
            feature_names: None,
        })
    }

    /// One row per subject: chart coordinates under `metric`.
    pub fn from_cohort(cohort: &CohortDataset, metric: Metric) -> Result<Self> {
        let rows = cohort
            .subjects()
            .par_iter()
            .map(|s| {
                embed(&s.matrix, metric)
                    .map(|c| c.values)
                    .map_err(|e| Error::for_subject(&s.id, e))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = rows.first().map_or(0, Vec::len);
        Self::new(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }
}

pub(crate) fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub(crate) fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

pub(crate) fn select<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i]).collect()
}
