//! Two-sample testing on interpoint distances with a label-permutation null.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohort::{CohortDataset, Label};
use crate::corr::{embed, Metric};
use crate::error::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// Symmetric, nonnegative, zero-diagonal matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn new(d: DMatrix<f64>) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::dims("square matrix", format!("{}×{}", d.nrows(), d.ncols())));
        }
        let m = d.nrows();
        for i in 0..m {
            if d[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero self-distance at {i}")));
            }
            for j in 0..m {
                let v = d[(i, j)];
                if !(v >= 0.0 && v.is_finite()) || v != d[(j, i)] {
                    return Err(Error::InvalidInput(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { d })
    }

    pub fn len(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.d.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.d
    }
}

/// `d[i][j] = metric(items[i], items[j])`, each unordered pair evaluated once.
pub fn pairwise_distances<T, F>(items: &[T], metric: F) -> Result<DistanceMatrix>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let m = items.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..m)
                .map(|j| metric(&items[i], &items[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut d = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("metric returned {v} for ({i}, {j})")));
            }
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(DistanceMatrix { d })
}

/// Distances between all cohort matrices under `metric`, embedding each
/// subject once. `Metric::Euclidean` gives the Frobenius distance of the raw
/// matrices.
pub fn cohort_distances(cohort: &CohortDataset, metric: Metric) -> Result<DistanceMatrix> {
    let coords = cohort
        .subjects()
        .par_iter()
        .map(|s| embed(&s.matrix, metric).map_err(|e| Error::for_subject(&s.id, e)))
        .collect::<Result<Vec<_>>>()?;
    pairwise_distances(&coords, |a, b| a.distance(b))
}

fn group_sizes(labels: &[Label]) -> (usize, usize) {
    let b = labels.iter().filter(|l| l.is_positive()).count();
    (labels.len() - b, b)
}

fn check_groups(d: &DistanceMatrix, labels: &[Label]) -> Result<()> {
    if labels.len() != d.len() {
        return Err(Error::dims(d.len(), labels.len()));
    }
    let (na, nb) = group_sizes(labels);
    for (group, size) in [("A", na), ("B", nb)] {
        if size < 2 {
            return Err(Error::DegenerateGroup { group, size, required: 2 });
        }
    }
    Ok(())
}

/// `T = d̄_AB − (d̄_AA + d̄_BB)/2` over unordered distinct pairs.
pub fn bg_statistic(d: &DistanceMatrix, labels: &[Label]) -> Result<f64> {
    check_groups(d, labels)?;
    Ok(statistic_unchecked(d, labels))
}

fn statistic_unchecked(d: &DistanceMatrix, labels: &[Label]) -> f64 {
    let m = labels.len();
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = d.d[(i, j)];
            match (labels[i], labels[j]) {
                (Label::A, Label::A) => aa += v,
                (Label::B, Label::B) => bb += v,
                _ => ab += v,
            }
        }
    }
    let (na, nb) = group_sizes(labels);
    let (na, nb) = (na as f64, nb as f64);
    let mean_ab = ab / (na * nb);
    let mean_aa = aa / (na * (na - 1.0) / 2.0);
    let mean_bb = bb / (nb * (nb - 1.0) / 2.0);
    mean_ab - 0.5 * (mean_aa + mean_bb)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationTestResult {
    pub statistic: f64,
    /// `(1 + #{T_perm ≥ T_obs}) / (1 + n_permutations)`.
    pub p_value: f64,
    pub n_permutations: usize,
    pub null_samples: Vec<f64>,
    pub seed: u64,
}

/// Label-permutation test of the statistic above.
///
/// All permutations are drawn from `seed` before any statistic is evaluated,
/// so the result does not depend on how evaluation is scheduled.
pub fn permutation_test(
    d: &DistanceMatrix,
    labels: &[Label],
    n_perm: usize,
    seed: u64,
) -> Result<PermutationTestResult> {
    let statistic = bg_statistic(d, labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let permutations: Vec<Vec<Label>> = (0..n_perm)
        .map(|_| {
            let mut l = labels.to_vec();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    let null_samples: Vec<f64> = permutations
        .par_iter()
        .map(|l| statistic_unchecked(d, l))
        .collect();
    // Tolerate rounding when a permutation reproduces the observed split.
    let cutoff = statistic - 1e-12 * statistic.abs().max(1.0);
    let exceed = null_samples.iter().filter(|&&t| t >= cutoff).count();
    Ok(PermutationTestResult {
        statistic,
        p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
        n_permutations: n_perm,
        null_samples,
        seed,
    })
}
