//! Seeded synthetic cohorts with planted group, age and subspace effects.
//!
//! Every subject draws from its own ChaCha stream `(seed, subject index)`,
//! so a subject's matrix does not depend on generation order or on how many
//! other subjects are generated.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cohort::{CohortDataset, Label, Subject};
use crate::corr::{exp_off, CorrelationMatrix, HollowSymmetricMatrix};
use crate::error::{Error, Result};
use crate::grassmann::{grassmann_exp, GrassmannPoint};
use crate::linalg::{self, strict_upper_index, triangular_len};

/// Stream reserved for cohort-level draws (effect support, centers).
const SHARED_STREAM: u64 = u64::MAX;

fn subject_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn shared_rng(seed: u64) -> ChaCha8Rng {
    subject_rng(seed, SHARED_STREAM)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Hollow matrix with independent `N(0, sd²)` upper entries.
pub fn random_hollow(n: usize, sd: f64, rng: &mut impl Rng) -> HollowSymmetricMatrix {
    let v = (0..triangular_len(n)).map(|_| sd * gaussian(rng)).collect();
    HollowSymmetricMatrix::from_upper(n, v).expect("length matches")
}

/// `Exp_off(S)` for a hollow `S` with `N(0, concentration²)` entries.
pub fn random_correlation(n: usize, concentration: f64, seed: u64) -> Result<CorrelationMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    exp_off(&random_hollow(n, concentration, &mut subject_rng(seed, 0)))
}

/// Parameters of a planted correlation cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub m_per_group: usize,
    /// Frobenius norm of the planted Off–log shift.
    pub effect_size: f64,
    /// Strict-upper coordinates (row-major) carrying the effect.
    pub effect_support: Vec<usize>,
    /// Standard deviation of the subject-level Off–log entries.
    pub noise_scale: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Effect on `support_size` coordinates drawn from the seed.
    pub fn new(n: usize, m_per_group: usize, effect_size: f64, support_size: usize, noise_scale: f64, seed: u64) -> Self {
        let mut coords: Vec<usize> = (0..triangular_len(n)).collect();
        coords.shuffle(&mut shared_rng(seed));
        coords.truncate(support_size.min(coords.len()));
        coords.sort_unstable();
        SynthSpec {
            n,
            m_per_group,
            effect_size,
            effect_support: coords,
            noise_scale,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        if !(self.effect_size >= 0.0) || !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidInput("effect size and noise must be nonnegative".into()));
        }
        if self.effect_support.is_empty() && self.effect_size > 0.0 {
            return Err(Error::InvalidInput("effect support is empty".into()));
        }
        if let Some(&c) = self.effect_support.iter().find(|&&c| c >= triangular_len(self.n)) {
            return Err(Error::InvalidInput(format!("support coordinate {c} out of range")));
        }
        Ok(())
    }

    /// Unit-norm direction `Δ̂`: equal entries on the support.
    pub fn effect_direction(&self) -> HollowSymmetricMatrix {
        let mut v = vec![0.0; triangular_len(self.n)];
        if !self.effect_support.is_empty() {
            let w = 1.0 / (2.0 * self.effect_support.len() as f64).sqrt();
            for &c in &self.effect_support {
                v[c] = w;
            }
        }
        HollowSymmetricMatrix::from_upper(self.n, v).expect("length matches")
    }

    /// `Δ = effect_size · Δ̂`.
    pub fn effect(&self) -> HollowSymmetricMatrix {
        self.effect_direction().scaled(self.effect_size)
    }
}

fn subject_id(i: usize) -> String {
    format!("sub-{i:04}")
}

/// Group A: `Exp_off(S_i)`; group B: `Exp_off(S_i + Δ)`.
pub fn inject_group_effect(spec: &SynthSpec) -> Result<CohortDataset> {
    spec.validate()?;
    let delta = spec.effect();
    let subjects = (0..2 * spec.m_per_group)
        .into_par_iter()
        .map(|i| -> Result<Subject> {
            let label = if i < spec.m_per_group { Label::A } else { Label::B };
            let mut s = random_hollow(spec.n, spec.noise_scale, &mut subject_rng(spec.seed, i as u64));
            if label == Label::B {
                s = s.add(&delta)?;
            }
            Ok(Subject {
                id: subject_id(i),
                matrix: exp_off(&s)?,
                label: Some(label),
                age: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CohortDataset::new(subjects)
}

/// Settings for [`inject_age_trend`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeTrend {
    /// Years per unit of `⟨S_i, Δ̂⟩`.
    pub slope: f64,
    /// Standard deviation of additive age noise (years).
    pub age_noise: f64,
}

/// `2·m_per_group` unlabeled subjects with
/// `S_i = noise_scale·G_i + effect_size·ξ_i·Δ̂` and
/// `age_i = 50 + slope·⟨S_i, Δ̂⟩ + age_noise·ε_i`, clipped to `[18, 90]`.
///
/// The latent loading `ξ_i ~ N(0, 1)` makes the planted direction a
/// high-variance direction of the cohort.
pub fn inject_age_trend(spec: &SynthSpec, trend: AgeTrend) -> Result<CohortDataset> {
    spec.validate()?;
    let dir = spec.effect_direction();
    let subjects = (0..2 * spec.m_per_group)
        .into_par_iter()
        .map(|i| -> Result<Subject> {
            let mut rng = subject_rng(spec.seed, i as u64);
            let g = random_hollow(spec.n, spec.noise_scale, &mut rng);
            let xi = gaussian(&mut rng);
            let eps = gaussian(&mut rng);
            let s = g.add(&dir.scaled(spec.effect_size * xi))?;
            let age = (50.0 + trend.slope * s.dot(&dir) + trend.age_noise * eps).clamp(18.0, 90.0);
            Ok(Subject {
                id: subject_id(i),
                matrix: exp_off(&s)?,
                label: None,
                age: Some(age),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CohortDataset::new(subjects)
}

/// Per-sample basis change applied after sampling subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jitter {
    None,
    /// Independent random sign per column.
    SignFlips,
    /// Haar-random `k × k` orthogonal factor.
    Rotations,
}

#[derive(Debug, Clone)]
pub struct SubspaceCohort {
    pub center_a: GrassmannPoint,
    pub center_b: GrassmannPoint,
    pub group_a: Vec<GrassmannPoint>,
    pub group_b: Vec<GrassmannPoint>,
}

impl SubspaceCohort {
    /// Group A then group B, with matching labels.
    pub fn points_and_labels(&self) -> (Vec<GrassmannPoint>, Vec<Label>) {
        let points = self.group_a.iter().chain(&self.group_b).cloned().collect();
        let labels = std::iter::repeat_n(Label::A, self.group_a.len())
            .chain(std::iter::repeat_n(Label::B, self.group_b.len()))
            .collect();
        (points, labels)
    }

    /// Same subspaces with `jitter` applied to every sample basis.
    pub fn jittered(&self, jitter: Jitter, seed: u64) -> Self {
        let apply = |points: &[GrassmannPoint], offset: usize| -> Vec<GrassmannPoint> {
            points
                .iter()
                .enumerate()
                .map(|(i, p)| jitter_basis(p, jitter, &mut subject_rng(seed ^ 0x5eed, (offset + i) as u64)))
                .collect()
        };
        SubspaceCohort {
            center_a: self.center_a.clone(),
            center_b: self.center_b.clone(),
            group_a: apply(&self.group_a, 0),
            group_b: apply(&self.group_b, self.group_a.len()),
        }
    }
}

fn random_orthogonal(n: usize, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, k, |_, _| gaussian(rng));
    linalg::orthonormalize(&g)
}

fn jitter_basis(p: &GrassmannPoint, jitter: Jitter, rng: &mut impl Rng) -> GrassmannPoint {
    match jitter {
        Jitter::None => p.clone(),
        Jitter::SignFlips => {
            let flips: Vec<bool> = (0..p.k()).map(|_| rng.random_bool(0.5)).collect();
            p.sign_flipped(&flips)
        }
        Jitter::Rotations => {
            let q = random_orthogonal(p.k(), p.k(), rng);
            GrassmannPoint::from_orthonormal_unchecked(p.basis() * q)
        }
    }
}

/// Two classes of `k`-dimensional subspaces of `ℝⁿ`.
///
/// The centers differ by a single principal angle `angle` (one basis vector
/// rotated within a coordinate plane, then both centers rotated by a common
/// random orthogonal matrix). Samples are `Exp_center(T)` for a horizontal
/// Gaussian tangent `T` with entry scale `noise`.
pub fn inject_subspace_effect(n: usize, k: usize, m_per_group: usize, angle: f64, noise: f64, seed: u64) -> Result<SubspaceCohort> {
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&angle) || !(noise >= 0.0) {
        return Err(Error::InvalidInput(format!("need angle in [0, π/2) and noise >= 0, got {angle}, {noise}")));
    }
    let q = random_orthogonal(n, n, &mut shared_rng(seed));
    let mut a = DMatrix::identity(n, k);
    let mut b = a.clone();
    b[(0, 0)] = angle.cos();
    b[(k, 0)] = angle.sin();
    a = &q * a;
    b = &q * b;
    let center_a = GrassmannPoint::from_orthonormal_unchecked(linalg::orthonormalize(&a));
    let center_b = GrassmannPoint::from_orthonormal_unchecked(linalg::orthonormalize(&b));

    let sample = |center: &GrassmannPoint, i: usize| -> Result<GrassmannPoint> {
        let mut rng = subject_rng(seed, i as u64);
        let g = DMatrix::from_fn(n, k, |_, _| noise * gaussian(&mut rng));
        let x = center.basis();
        let tangent = &g - x * (x.transpose() * &g);
        grassmann_exp(center, &tangent)
    };
    let group_a = (0..m_per_group).map(|i| sample(&center_a, i)).collect::<Result<Vec<_>>>()?;
    let group_b = (0..m_per_group)
        .map(|i| sample(&center_b, m_per_group + i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceCohort {
        center_a,
        center_b,
        group_a,
        group_b,
    })
}

/// Correlation cohort with modular structure whose groups differ in the
/// community membership of a few nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySpec {
    pub n: usize,
    pub communities: usize,
    pub m_per_group: usize,
    /// Off–log coupling between nodes of the same community.
    pub within: f64,
    /// Standard deviation of subject-level Off–log noise.
    pub noise: f64,
    /// Nodes that group B exchanges between the first two communities.
    pub moved: usize,
    pub seed: u64,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        CommunitySpec {
            n: 30,
            communities: 5,
            m_per_group: 20,
            within: 0.4,
            noise: 0.1,
            moved: 2,
            seed: 42,
        }
    }
}

impl CommunitySpec {
    /// Community of each node in group A (contiguous blocks) or B.
    pub fn membership(&self, label: Label) -> Vec<usize> {
        let size = self.n.div_ceil(self.communities);
        let mut m: Vec<usize> = (0..self.n).map(|i| i / size).collect();
        if label == Label::B {
            // Swap the last `moved` nodes of community 0 with the first
            // `moved` nodes of community 1; sizes stay equal.
            let moved = self.moved.min(size).min(self.n.saturating_sub(size));
            for t in 0..moved {
                m.swap(size - 1 - t, size + t);
            }
        }
        m
    }
}

pub fn community_cohort(spec: &CommunitySpec) -> Result<CohortDataset> {
    if spec.communities < 2 || spec.communities > spec.n {
        return Err(Error::InvalidInput(format!("need 2 <= communities <= n, got {}", spec.communities)));
    }
    let n = spec.n;
    let structure = |label: Label| -> HollowSymmetricMatrix {
        let m = spec.membership(label);
        let mut v = vec![0.0; triangular_len(n)];
        for i in 0..n {
            for j in (i + 1)..n {
                if m[i] == m[j] {
                    v[strict_upper_index(n, i, j)] = spec.within;
                }
            }
        }
        HollowSymmetricMatrix::from_upper(n, v).expect("length matches")
    };
    let (sa, sb) = (structure(Label::A), structure(Label::B));
    let subjects = (0..2 * spec.m_per_group)
        .into_par_iter()
        .map(|i| -> Result<Subject> {
            let label = if i < spec.m_per_group { Label::A } else { Label::B };
            let base = if label == Label::A { &sa } else { &sb };
            let s = base.add(&random_hollow(n, spec.noise, &mut subject_rng(spec.seed, i as u64)))?;
            Ok(Subject {
                id: subject_id(i),
                matrix: exp_off(&s)?,
                label: Some(label),
                age: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CohortDataset::new(subjects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{dist, frechet_mean, validate_or_shrink, Metric};
    use crate::grassmann::grassmann_dist;
    use approx::assert_abs_diff_eq;

    #[test]
    fn random_correlation_examples() {
        assert_eq!(random_correlation(4, 0.0, 1).unwrap(), CorrelationMatrix::identity(4));
        let c = random_correlation(6, 0.5, 3).unwrap();
        assert_eq!(validate_or_shrink(c.as_matrix(), false).unwrap().shrinkage, 0.0);
        assert_eq!(c, random_correlation(6, 0.5, 3).unwrap());
    }

    #[test]
    fn effect_has_requested_norm() {
        let spec = SynthSpec::new(10, 5, 1.7, 6, 0.3, 2);
        assert_eq!(spec.effect_support.len(), 6);
        assert_abs_diff_eq!(spec.effect().norm(), 1.7, epsilon = 1e-12);
    }

    #[test]
    fn zero_effect_groups_share_generator() {
        let spec = SynthSpec::new(5, 4, 0.0, 3, 0.4, 9);
        let cohort = inject_group_effect(&spec).unwrap();
        assert_eq!(cohort.len(), 8);
        let again = inject_group_effect(&spec).unwrap();
        for (a, b) in cohort.subjects().iter().zip(again.subjects()) {
            assert_eq!(a.matrix, b.matrix);
        }
    }

    #[test]
    fn group_means_separate_by_effect() {
        let spec = SynthSpec::new(6, 200, 1.0, 4, 0.3, 5);
        let cohort = inject_group_effect(&spec).unwrap();
        let split = |l: Label| -> Vec<CorrelationMatrix> {
            cohort.subjects().iter().filter(|s| s.label == Some(l)).map(|s| s.matrix.clone()).collect()
        };
        let ma = frechet_mean(&split(Label::A), Metric::OffLog).unwrap();
        let mb = frechet_mean(&split(Label::B), Metric::OffLog).unwrap();
        let d = dist(&ma, &mb, Metric::OffLog).unwrap();
        assert!((d - 1.0).abs() < 0.15, "{d}");
    }

    #[test]
    fn age_trend_ages_clip_and_align() {
        let spec = SynthSpec::new(6, 20, 2.0, 5, 0.2, 4);
        let trend = AgeTrend { slope: 8.0, age_noise: 0.0 };
        let cohort = inject_age_trend(&spec, trend).unwrap();
        let ages = cohort.ages().unwrap();
        assert_eq!(ages.len(), 40);
        assert!(ages.iter().all(|a| (18.0..=90.0).contains(a)));
        let flat = inject_age_trend(&spec, AgeTrend { slope: 0.0, age_noise: 0.0 }).unwrap();
        assert!(flat.ages().unwrap().iter().all(|&a| a == 50.0));
    }

    #[test]
    fn subspace_centers_at_planted_angle() {
        let c = inject_subspace_effect(8, 2, 3, 0.4, 0.0, 1).unwrap();
        assert_abs_diff_eq!(grassmann_dist(&c.center_a, &c.center_b).unwrap(), 0.4, epsilon = 1e-12);
        for p in &c.group_a {
            assert!(grassmann_dist(p, &c.center_a).unwrap() < 1e-12);
        }
        let same = inject_subspace_effect(8, 2, 3, 0.0, 0.1, 1).unwrap();
        assert!(grassmann_dist(&same.center_a, &same.center_b).unwrap() < 1e-12);
        let j = c.jittered(Jitter::Rotations, 3);
        assert!(grassmann_dist(&j.group_b[0], &c.group_b[0]).unwrap() < 1e-7);
    }

    #[test]
    fn community_membership_moves_nodes() {
        let spec = CommunitySpec::default();
        let a = spec.membership(Label::A);
        let b = spec.membership(Label::B);
        assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 4);
        let cohort = community_cohort(&CommunitySpec { m_per_group: 2, ..spec }).unwrap();
        assert_eq!(cohort.len(), 4);
    }
}
