//! Stratified fold plans for nested cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cohort::Label;
use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 5;
const AGE_BINS: usize = 5;

/// A train/test split of sample indices; the two sets never overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    train: Vec<usize>,
    test: Vec<usize>,
}

impl Fold {
    pub fn new(mut train: Vec<usize>, mut test: Vec<usize>) -> Result<Self> {
        train.sort_unstable();
        test.sort_unstable();
        if let Some(i) = train.iter().find(|i| test.binary_search(i).is_ok()) {
            return Err(Error::Leakage(format!("sample {i} is in both train and test")));
        }
        Ok(Fold { train, test })
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }
}

/// What to stratify on.
#[derive(Debug, Clone, Copy)]
pub enum Strata<'a> {
    Labels(&'a [Label]),
    /// Continuous targets, stratified by quintile bins.
    Ages(&'a [f64]),
    None(usize),
}

impl Strata<'_> {
    fn len(&self) -> usize {
        match self {
            Strata::Labels(l) => l.len(),
            Strata::Ages(a) => a.len(),
            Strata::None(n) => *n,
        }
    }

    /// Stratum key of each position in `subset`.
    fn keys(&self, subset: &[usize]) -> Vec<usize> {
        match self {
            Strata::Labels(l) => subset.iter().map(|&i| usize::from(l[i].is_positive())).collect(),
            Strata::None(_) => vec![0; subset.len()],
            Strata::Ages(a) => {
                let mut order: Vec<usize> = (0..subset.len()).collect();
                order.sort_by(|&x, &y| a[subset[x]].total_cmp(&a[subset[y]]));
                let mut keys = vec![0; subset.len()];
                for (rank, &pos) in order.iter().enumerate() {
                    keys[pos] = rank * AGE_BINS / subset.len();
                }
                keys
            }
        }
    }
}

/// Outer folds and, for each, inner folds drawn from its training set.
#[derive(Debug, Clone, PartialEq)]
pub struct CVPlan {
    pub outer: Vec<Fold>,
    /// `inner[f]` splits `outer[f].train()`; indices refer to the full cohort.
    pub inner: Vec<Vec<Fold>>,
    pub stratified: bool,
    pub seed: u64,
}

/// Shuffles each stratum and deals it round-robin over `k` folds, carrying
/// the position across strata so fold sizes stay balanced.
fn split(subset: &[usize], strata: &Strata, k: usize, stratified: bool, rng: &mut ChaCha8Rng) -> Result<Vec<Fold>> {
    if subset.len() < k {
        return Err(Error::TooFewSamples(format!(
            "{} samples cannot fill {k} folds",
            subset.len()
        )));
    }
    let keys = if stratified { strata.keys(subset) } else { vec![0; subset.len()] };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, key) in keys.into_iter().enumerate() {
        groups.entry(key).or_default().push(subset[pos]);
    }
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0;
    for members in groups.values_mut() {
        members.shuffle(rng);
        for &i in members.iter() {
            assignment[next % k].push(i);
            next += 1;
        }
    }
    (0..k)
        .map(|f| {
            let train = assignment
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            Fold::new(train, assignment[f].clone())
        })
        .collect()
}

pub fn make_cv_plan(strata: Strata, k_outer: usize, k_inner: usize, stratified: bool, seed: u64) -> Result<CVPlan> {
    if k_outer < 2 || k_inner < 2 {
        return Err(Error::InvalidInput("need at least 2 folds".into()));
    }
    let all: Vec<usize> = (0..strata.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = split(&all, &strata, k_outer, stratified, &mut rng)?;
    let inner = outer
        .iter()
        .map(|f| split(f.train(), &strata, k_inner, stratified, &mut rng))
        .collect::<Result<_>>()?;
    Ok(CVPlan {
        outer,
        inner,
        stratified,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{A, B};

    #[test]
    fn overlapping_fold_is_leakage() {
        assert!(matches!(Fold::new(vec![0, 1, 2], vec![2, 3]), Err(Error::Leakage(_))));
    }

    #[test]
    fn balanced_ten() {
        let labels = [A, A, A, A, A, B, B, B, B, B];
        let plan = make_cv_plan(Strata::Labels(&labels), 5, 2, true, 7).unwrap();
        for f in &plan.outer {
            let b = f.test().iter().filter(|&&i| labels[i] == B).count();
            assert_eq!((f.test().len(), b), (2, 1));
        }
        assert_eq!(plan, make_cv_plan(Strata::Labels(&labels), 5, 2, true, 7).unwrap());
    }

    #[test]
    fn folds_partition_and_nest() {
        let ages: Vec<f64> = (0..37).map(|i| 20.0 + (i * 13 % 37) as f64).collect();
        let plan = make_cv_plan(Strata::Ages(&ages), 5, 5, true, 1).unwrap();
        let mut seen: Vec<usize> = plan.outer.iter().flat_map(|f| f.test().to_vec()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..37).collect::<Vec<_>>());
        for (outer, inner) in plan.outer.iter().zip(&plan.inner) {
            for f in inner {
                assert!(f.train().iter().chain(f.test()).all(|i| outer.train().contains(i)));
            }
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            make_cv_plan(Strata::None(3), 5, 5, false, 0),
            Err(Error::TooFewSamples(_))
        ));
    }
}
