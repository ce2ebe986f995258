//! End-to-end cross-validated pipelines.
//!
//! Every fitted step (scaler, PCA, feature ranking, model) sees only the
//! training indices of its fold. Outer folds run in parallel; results are
//! collected in fold order, so reports do not depend on the thread count.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::anova::{anova_f_scores, rank_by_score};
use super::cv::{CVPlan, Fold};
use super::elastic_net::{elastic_net_fit, ElasticNetOptions};
use super::lda::{lda_fit, DEFAULT_SHRINKAGE};
use super::metrics::{auc, binary_metrics, mae, r_squared};
use super::preprocess::{Pca, Standardizer, DEFAULT_VARIANCE_TARGET};
use super::svm::{linear_svm_fit, SvmOptions};
use super::{select, select_columns, select_rows, FeatureMatrix};
use crate::cohort::{CohortDataset, Label};
use crate::corr::Metric;
use crate::error::{Error, Result};
use crate::graph::{
    adjacency_from_correlation, default_j_max, group_k, laplacian_spectrum, low_frequency_subspace,
    LaplacianSpectrum, WeightedGraph, DEFAULT_DENSITY,
};
use crate::grassmann::{classify_nearest_center, fisher_fit, DiscriminantModel, FisherOptions, GrassmannPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub sd: f64,
}

impl MeanSd {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: BTreeMap<String, f64>,
    pub hyperparameters: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CVReport {
    pub task: String,
    pub representation: String,
    pub folds: Vec<FoldReport>,
    pub aggregate: BTreeMap<String, MeanSd>,
    /// Out-of-fold prediction (age, or decision score) per subject.
    pub predictions: Vec<f64>,
}

impl CVReport {
    fn assemble(task: &str, representation: &str, folds: Vec<FoldReport>, predictions: Vec<f64>) -> Self {
        let mut aggregate = BTreeMap::new();
        if let Some(first) = folds.first() {
            for key in first.metrics.keys() {
                let values: Vec<f64> = folds.iter().map(|f| f.metrics[key]).collect();
                aggregate.insert(key.clone(), MeanSd::of(&values));
            }
        }
        CVReport {
            task: task.into(),
            representation: representation.into(),
            folds,
            aggregate,
            predictions,
        }
    }

    pub fn mean(&self, metric: &str) -> f64 {
        self.aggregate.get(metric).map_or(f64::NAN, |m| m.mean)
    }
}

/// Rejects plans whose outer tests do not partition the samples or whose
/// inner folds reach outside their outer training set.
fn validate_plan(plan: &CVPlan, m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for fold in &plan.outer {
        for &i in fold.test() {
            if i >= m || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Leakage(format!("sample {i} appears in more than one outer test set")));
            }
        }
        if fold.train().iter().any(|&i| i >= m) {
            return Err(Error::dims(m, "out-of-range index"));
        }
    }
    if plan.inner.len() != plan.outer.len() {
        return Err(Error::dims(plan.outer.len(), plan.inner.len()));
    }
    for (outer, inner) in plan.outer.iter().zip(&plan.inner) {
        for f in inner {
            if let Some(i) = f.train().iter().chain(f.test()).find(|i| outer.train().binary_search(i).is_err()) {
                return Err(Error::Leakage(format!("inner fold uses sample {i} outside its outer training set")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrainAgeConfig {
    pub variance_target: f64,
    pub lambdas: Vec<f64>,
    pub l1_ratios: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BrainAgeConfig {
    fn default() -> Self {
        BrainAgeConfig {
            variance_target: DEFAULT_VARIANCE_TARGET,
            lambdas: (0..10).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 9.0)).collect(),
            l1_ratios: vec![0.1, 0.5, 0.9],
            tol: 1e-7,
            max_iter: 10_000,
        }
    }
}

impl BrainAgeConfig {
    fn grid(&self) -> Vec<ElasticNetOptions> {
        self.lambdas
            .iter()
            .flat_map(|&lambda| {
                self.l1_ratios.iter().map(move |&l1_ratio| ElasticNetOptions {
                    lambda,
                    l1_ratio,
                    tol: self.tol,
                    max_iter: self.max_iter,
                })
            })
            .collect()
    }
}

/// Scaler and PCA fitted on `fold.train()`, applied to both sides.
fn scale_and_reduce(x: &DMatrix<f64>, fold: &Fold, variance_target: f64) -> Result<(DMatrix<f64>, DMatrix<f64>, usize)> {
    let train = select_rows(x, fold.train());
    let test = select_rows(x, fold.test());
    let scaler = Standardizer::fit(&train)?;
    let pca = Pca::fit(&scaler.apply(&train)?, variance_target)?;
    Ok((
        pca.apply(&scaler.apply(&train)?)?,
        pca.apply(&scaler.apply(&test)?)?,
        pca.n_components(),
    ))
}

/// Brain-age regression: embed → standardize → PCA → Elastic Net, with
/// `(λ, α)` chosen by inner-fold mean absolute error.
pub fn run_brainage(cohort: &CohortDataset, metric: Metric, plan: &CVPlan, config: &BrainAgeConfig) -> Result<CVReport> {
    let ages = cohort.ages()?;
    let x = FeatureMatrix::from_cohort(cohort, metric)?.values;
    run_brainage_features(&x, &ages, metric.name(), plan, config)
}

pub(crate) fn run_brainage_features(
    x: &DMatrix<f64>,
    ages: &[f64],
    representation: &str,
    plan: &CVPlan,
    config: &BrainAgeConfig,
) -> Result<CVReport> {
    validate_plan(plan, x.nrows())?;
    let grid = config.grid();
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty Elastic Net grid".into()));
    }
    let fit_predict = |fold: &Fold, opts: &ElasticNetOptions| -> Result<(Vec<f64>, usize, bool)> {
        let (train, test, c) = scale_and_reduce(x, fold, config.variance_target)?;
        let y = DVector::from_vec(select(ages, fold.train()));
        let model = elastic_net_fit(&train, &y, opts)?;
        Ok((model.predict(&test).iter().copied().collect(), c, model.converged))
    };

    let results = plan
        .outer
        .par_iter()
        .zip(&plan.inner)
        .enumerate()
        .map(|(f, (outer, inner))| -> Result<(FoldReport, Vec<f64>)> {
            // inner_mae[g] summed over inner folds
            let per_inner = inner
                .par_iter()
                .map(|fold| -> Result<Vec<f64>> {
                    let (train, test, _) = scale_and_reduce(x, fold, config.variance_target)?;
                    let y = DVector::from_vec(select(ages, fold.train()));
                    let truth = select(ages, fold.test());
                    grid.iter()
                        .map(|opts| {
                            let model = elastic_net_fit(&train, &y, opts)?;
                            let pred: Vec<f64> = model.predict(&test).iter().copied().collect();
                            mae(&pred, &truth)
                        })
                        .collect()
                })
                .collect::<Result<Vec<_>>>()?;
            let score = |g: usize| per_inner.iter().map(|v| v[g]).sum::<f64>() / per_inner.len() as f64;
            let best = (1..grid.len()).fold(0, |b, g| if score(g) < score(b) { g } else { b });
            let chosen = grid[best];

            let (pred, c, converged) = fit_predict(outer, &chosen)?;
            let truth = select(ages, outer.test());
            let mut metrics = BTreeMap::new();
            metrics.insert("mae".into(), mae(&pred, &truth)?);
            metrics.insert("r2".into(), r_squared(&pred, &truth)?);
            let mut hyper = BTreeMap::new();
            hyper.insert("lambda".into(), chosen.lambda);
            hyper.insert("l1_ratio".into(), chosen.l1_ratio);
            hyper.insert("pca_components".into(), c as f64);
            let mut warnings = Vec::new();
            if !converged {
                warnings.push(format!("fold {f}: Elastic Net hit max_iter"));
            }
            Ok((
                FoldReport {
                    fold: f,
                    n_train: outer.train().len(),
                    n_test: outer.test().len(),
                    metrics,
                    hyperparameters: hyper,
                    warnings,
                },
                pred,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish("regression", representation, plan, x.nrows(), results))
}

fn finish(task: &str, representation: &str, plan: &CVPlan, m: usize, results: Vec<(FoldReport, Vec<f64>)>) -> CVReport {
    let mut predictions = vec![f64::NAN; m];
    let mut folds = Vec::with_capacity(results.len());
    for ((report, pred), fold) in results.into_iter().zip(&plan.outer) {
        for (&i, p) in fold.test().iter().zip(pred) {
            predictions[i] = p;
        }
        folds.push(report);
    }
    CVReport::assemble(task, representation, folds, predictions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationConfig {
    pub c_grid: Vec<f64>,
    pub top_k_grid: Vec<usize>,
    pub max_epochs: usize,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        ClassificationConfig {
            c_grid: vec![0.01, 0.1, 1.0, 10.0],
            top_k_grid: vec![100, 500, 1000],
            max_epochs: 1000,
        }
    }
}

impl ClassificationConfig {
    /// Grid values that fit `p` features; `[p]` if none do.
    fn top_k_for(&self, p: usize) -> Vec<usize> {
        let ks: Vec<usize> = self.top_k_grid.iter().copied().filter(|&k| k <= p).collect();
        if ks.is_empty() { vec![p] } else { ks }
    }
}

/// ANOVA selection, then scaling of the selected columns, then SVM, all on
/// `fold.train()`. Returns test decision scores.
fn svm_fold(x: &DMatrix<f64>, labels: &[Label], fold: &Fold, ranking: &[usize], top_k: usize, c: f64, max_epochs: usize, seed: u64) -> Result<(Vec<f64>, bool)> {
    let cols = &ranking[..top_k];
    let train = select_columns(&select_rows(x, fold.train()), cols);
    let test = select_columns(&select_rows(x, fold.test()), cols);
    let scaler = Standardizer::fit(&train)?;
    let mut opts = SvmOptions::new(c, seed);
    opts.max_epochs = max_epochs;
    let model = linear_svm_fit(&scaler.apply(&train)?, &select(labels, fold.train()), &opts)?;
    Ok((model.decision(&scaler.apply(&test)?).iter().copied().collect(), model.converged))
}

fn fold_ranking(x: &DMatrix<f64>, labels: &[Label], fold: &Fold) -> Result<Vec<usize>> {
    let scores = anova_f_scores(&select_rows(x, fold.train()), &select(labels, fold.train()))?;
    Ok(rank_by_score(&scores))
}

fn fold_seed(seed: u64, outer: usize, inner: Option<usize>) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add(outer as u64 * 101)
        .wrapping_add(inner.map_or(0, |i| i as u64 + 1))
}

/// Group classification: ANOVA feature selection → standardization → linear
/// SVM, with `(C, top_k)` chosen by inner-fold AUC.
pub fn run_classification(cohort: &CohortDataset, metric: Metric, plan: &CVPlan, config: &ClassificationConfig) -> Result<CVReport> {
    let labels = cohort.labels()?;
    let x = FeatureMatrix::from_cohort(cohort, metric)?.values;
    run_classification_features(&x, &labels, metric.name(), plan, config)
}

pub(crate) fn run_classification_features(
    x: &DMatrix<f64>,
    labels: &[Label],
    representation: &str,
    plan: &CVPlan,
    config: &ClassificationConfig,
) -> Result<CVReport> {
    validate_plan(plan, x.nrows())?;
    let top_ks = config.top_k_for(x.ncols());
    let grid: Vec<(usize, f64)> = top_ks
        .iter()
        .flat_map(|&k| config.c_grid.iter().map(move |&c| (k, c)))
        .collect();
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty SVM grid".into()));
    }

    let results = plan
        .outer
        .par_iter()
        .zip(&plan.inner)
        .enumerate()
        .map(|(f, (outer, inner))| -> Result<(FoldReport, Vec<f64>)> {
            let per_inner = inner
                .par_iter()
                .enumerate()
                .map(|(i, fold)| -> Result<Vec<Option<f64>>> {
                    let ranking = fold_ranking(x, labels, fold)?;
                    let truth = select(labels, fold.test());
                    let seed = fold_seed(plan.seed, f, Some(i));
                    grid.iter()
                        .map(|&(k, c)| {
                            let (scores, _) = svm_fold(x, labels, fold, &ranking, k, c, config.max_epochs, seed)?;
                            match auc(&scores, &truth) {
                                Ok(a) => Ok(Some(a)),
                                Err(Error::SingleClass(_)) => Ok(None),
                                Err(e) => Err(e),
                            }
                        })
                        .collect()
                })
                .collect::<Result<Vec<_>>>()?;
            let score = |g: usize| {
                let v: Vec<f64> = per_inner.iter().filter_map(|r| r[g]).collect();
                if v.is_empty() { f64::NEG_INFINITY } else { v.iter().sum::<f64>() / v.len() as f64 }
            };
            let best = (1..grid.len()).fold(0, |b, g| if score(g) > score(b) { g } else { b });
            let (top_k, c) = grid[best];

            let ranking = fold_ranking(x, labels, outer)?;
            let (scores, converged) = svm_fold(x, labels, outer, &ranking, top_k, c, config.max_epochs, fold_seed(plan.seed, f, None))?;
            let truth = select(labels, outer.test());
            let preds: Vec<Label> = scores.iter().map(|&s| if s > 0.0 { Label::B } else { Label::A }).collect();
            let bm = binary_metrics(&scores, &preds, &truth)?;
            let mut hyper = BTreeMap::new();
            hyper.insert("c".into(), c);
            hyper.insert("top_k".into(), top_k as f64);
            let mut warnings = Vec::new();
            if !converged {
                warnings.push(format!("fold {f}: SVM hit max_epochs"));
            }
            Ok((
                FoldReport {
                    fold: f,
                    n_train: outer.train().len(),
                    n_test: outer.test().len(),
                    metrics: classification_metrics(&bm),
                    hyperparameters: hyper,
                    warnings,
                },
                scores,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish("classification", representation, plan, x.nrows(), results))
}

fn classification_metrics(bm: &super::metrics::BinaryMetrics) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("accuracy".to_string(), bm.accuracy),
        ("auc".to_string(), bm.auc),
        ("sensitivity".to_string(), bm.sensitivity),
        ("specificity".to_string(), bm.specificity),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannConfig {
    pub density: f64,
    /// Defaults to `min(30, n − 1)`.
    pub j_max: Option<usize>,
    /// Fixes the subspace dimension instead of choosing it from gaps.
    pub k: Option<usize>,
    pub fisher: FisherOptions,
    pub lda_shrinkage: f64,
}

impl Default for GrassmannConfig {
    fn default() -> Self {
        GrassmannConfig {
            density: DEFAULT_DENSITY,
            j_max: None,
            k: None,
            fisher: FisherOptions::default(),
            lda_shrinkage: DEFAULT_SHRINKAGE,
        }
    }
}

/// Summary of one fold's fitted discriminant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub fold: usize,
    pub k: usize,
    pub iterations: usize,
    pub converged: bool,
    pub initial_ratio: f64,
    pub final_ratio: f64,
    pub region_scores: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrassmannReport {
    pub grassmann: CVReport,
    pub lda: CVReport,
    pub k_per_fold: Vec<usize>,
    /// Fraction of folds in which each node was among the top tenth by region score.
    pub region_frequency: Vec<f64>,
    pub models: Vec<ModelSummary>,
    /// Out-of-fold nearest-center labels.
    pub predicted_labels: Vec<Label>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub fitted: Vec<DiscriminantModel>,
}

/// Subspace classification from connectivity: thresholded graphs →
/// Laplacian harmonics → Fisher-ratio centers → nearest center, with an LDA
/// baseline on the flattened bases.
pub fn run_grassmann_pipeline(cohort: &CohortDataset, plan: &CVPlan, config: &GrassmannConfig) -> Result<GrassmannReport> {
    let labels = cohort.labels()?;
    let n = cohort.dim();
    let j_max = config.j_max.unwrap_or_else(|| default_j_max(n));
    let prepared = cohort
        .subjects()
        .par_iter()
        .map(|s| -> Result<(WeightedGraph, LaplacianSpectrum)> {
            let g = adjacency_from_correlation(&s.matrix, config.density).map_err(|e| Error::for_subject(&s.id, e))?;
            let spec = laplacian_spectrum(&g).map_err(|e| Error::for_subject(&s.id, e))?;
            Ok((g, spec))
        })
        .collect::<Result<Vec<_>>>()?;
    let isolated = prepared.iter().filter(|(g, _)| !g.isolated_nodes().is_empty()).count();

    validate_plan(plan, labels.len())?;
    let ks = plan
        .outer
        .iter()
        .map(|fold| -> Result<usize> {
            if let Some(k) = config.k {
                return Ok(k);
            }
            let pick = |target: Label| -> Vec<WeightedGraph> {
                fold.train().iter().filter(|&&i| labels[i] == target).map(|&i| prepared[i].0.clone()).collect()
            };
            group_k(&pick(Label::A), &pick(Label::B), j_max)
        })
        .collect::<Result<Vec<_>>>()?;

    let per_fold_points = ks
        .iter()
        .map(|&k| {
            prepared
                .iter()
                .map(|(_, spec)| low_frequency_subspace(spec, k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = subspace_folds(&per_fold_points, &labels, plan, config, &ks)?;
    if isolated > 0 {
        report.warnings.push(format!("{isolated} subject graph(s) have isolated nodes"));
    }
    Ok(report)
}

/// Same evaluation on precomputed subspaces with a fixed dimension.
pub fn run_subspace_pipeline(points: &[GrassmannPoint], labels: &[Label], plan: &CVPlan, config: &GrassmannConfig) -> Result<GrassmannReport> {
    validate_plan(plan, labels.len())?;
    if points.len() != labels.len() {
        return Err(Error::dims(labels.len(), points.len()));
    }
    let k = points.first().map_or(0, GrassmannPoint::k);
    let per_fold: Vec<Vec<GrassmannPoint>> = vec![points.to_vec(); plan.outer.len()];
    subspace_folds(&per_fold, labels, plan, config, &vec![k; plan.outer.len()])
}

fn subspace_folds(
    per_fold_points: &[Vec<GrassmannPoint>],
    labels: &[Label],
    plan: &CVPlan,
    config: &GrassmannConfig,
    ks: &[usize],
) -> Result<GrassmannReport> {
    let m = labels.len();
    let results = plan
        .outer
        .par_iter()
        .zip(per_fold_points)
        .map(|(fold, points)| -> Result<_> {
            let side = |idx: &[usize], target: Label| -> Vec<GrassmannPoint> {
                idx.iter().filter(|&&i| labels[i] == target).map(|&i| points[i].clone()).collect()
            };
            let model = fisher_fit(&side(fold.train(), Label::A), &side(fold.train(), Label::B), &config.fisher)?;
            let mut scores = Vec::with_capacity(fold.test().len());
            let mut preds = Vec::with_capacity(fold.test().len());
            for &i in fold.test() {
                let (label, score) = classify_nearest_center(&model, &points[i])?;
                preds.push(label);
                scores.push(score);
            }
            let truth = select(labels, fold.test());
            let bm = binary_metrics(&scores, &preds, &truth)?;

            let rows: Vec<Vec<f64>> = points.iter().map(GrassmannPoint::flatten).collect();
            let flat = DMatrix::from_fn(m, rows[0].len(), |i, j| rows[i][j]);
            let lda = lda_fit(&select_rows(&flat, fold.train()), &select(labels, fold.train()), config.lda_shrinkage)?;
            let lda_scores: Vec<f64> = lda.decision(&select_rows(&flat, fold.test())).iter().copied().collect();
            let lda_preds = lda.predict(&select_rows(&flat, fold.test()));
            let lda_bm = binary_metrics(&lda_scores, &lda_preds, &truth)?;
            Ok((model, scores, preds, bm, lda_scores, lda_bm))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_fold_points.first().and_then(|p| p.first()).map_or(0, GrassmannPoint::n);
    let top = n.div_ceil(10).max(1);
    let mut frequency = vec![0.0; n];
    let mut g_results = Vec::new();
    let mut l_results = Vec::new();
    let mut predicted = vec![Label::A; m];
    let mut models = Vec::new();
    let mut fitted = Vec::new();
    let mut warnings = Vec::new();
    for (f, ((model, scores, preds, bm, lda_scores, lda_bm), fold)) in results.into_iter().zip(&plan.outer).enumerate() {
        for &r in rank_by_score(&model.region_scores).iter().take(top) {
            frequency[r] += 1.0 / plan.outer.len() as f64;
        }
        for (&i, &p) in fold.test().iter().zip(&preds) {
            predicted[i] = p;
        }
        let mut fold_warnings = Vec::new();
        if !model.converged {
            fold_warnings.push(format!("fold {f}: discriminant stopped before convergence"));
        }
        if ks[f] >= n {
            fold_warnings.push(format!("fold {f}: k = n, every subspace is the whole space"));
        }
        warnings.extend(fold_warnings.iter().cloned());
        let hyper = BTreeMap::from([("k".to_string(), ks[f] as f64)]);
        let report = |metrics| FoldReport {
            fold: f,
            n_train: fold.train().len(),
            n_test: fold.test().len(),
            metrics,
            hyperparameters: hyper.clone(),
            warnings: fold_warnings.clone(),
        };
        g_results.push((report(classification_metrics(&bm)), scores));
        l_results.push((report(classification_metrics(&lda_bm)), lda_scores));
        models.push(ModelSummary {
            fold: f,
            k: model.k,
            iterations: model.iterations,
            converged: model.converged,
            initial_ratio: model.initial_ratio(),
            final_ratio: model.final_ratio(),
            region_scores: model.region_scores.clone(),
        });
        fitted.push(model);
    }
    Ok(GrassmannReport {
        grassmann: finish("classification", "grassmann", plan, m, g_results),
        lda: finish("classification", "lda-flattened", plan, m, l_results),
        k_per_fold: ks.to_vec(),
        region_frequency: frequency,
        models,
        predicted_labels: predicted,
        warnings,
        fitted,
    })
}
