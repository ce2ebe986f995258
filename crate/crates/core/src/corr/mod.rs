//! Geometries on the open elliptope of full-rank correlation matrices.
//!
//! Three flat pullback geometries are provided, each defined by a global
//! chart onto a vector space:
//!
//! | metric      | chart                                                      |
//! |-------------|------------------------------------------------------------|
//! | `OffLog`    | `C ↦ Off(log C)`, hollow symmetric matrices                |
//! | `Ecm`       | `C ↦ L̃`, strict lower part of the row-normalized Cholesky factor |
//! | `Lec`       | `C ↦ log L̃`, strictly lower-triangular                     |
//! | `Euclidean` | raw upper-triangular entries (baseline only)              |
//!
//! Because every chart is a global diffeomorphism onto a flat space,
//! distances, geodesics and Fréchet means are computed in coordinates and
//! mapped back.
//!
//! Distance accounting: hollow symmetric coordinates (`OffLog`, `Euclidean`)
//! count both triangles, so the distance equals the Frobenius norm of the
//! difference of the full matrices (`√2 ×` the norm of the stored upper
//! triangle). Triangular coordinates (`Ecm`, `Lec`) are counted once.

mod cholesky_chart;
mod offlog;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, strict_upper_index, triangular_len, SymmetricMatrix};

pub use offlog::{
    exp_off, log_off, solve_diag_correction, star_inverse, star_product, DiagCorrection,
    DIAG_CORRECTION_MAX_ITER, DIAG_CORRECTION_TOL,
};

/// Symmetry tolerance applied when accepting raw input matrices.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Maximum deviation of a diagonal entry from 1 before input is rejected.
pub const DIAGONAL_TOL: f64 = 1e-6;
/// Inputs with a smallest eigenvalue at or below this are rank deficient.
pub const RANK_DEFICIENT_EIGENVALUE: f64 = 1e-10;
/// Smallest eigenvalue a shrunk matrix must reach.
pub const SHRINK_TARGET_EIGENVALUE: f64 = 1e-8;
/// Shrinkage intensities tried in order.
pub const SHRINK_GRID: [f64; 6] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// A full-rank correlation matrix: symmetric, positive definite, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    pub fn identity(n: usize) -> Self {
        CorrelationMatrix(DMatrix::identity(n, n))
    }

    /// Validates `m` strictly (no shrinkage).
    pub fn try_new(m: DMatrix<f64>) -> Result<Self> {
        validate_or_shrink(&m, false).map(|v| v.matrix)
    }

    /// 2×2 correlation matrix with off-diagonal `rho`.
    pub fn pair(rho: f64) -> Result<Self> {
        Self::try_new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    /// Wraps an SPD matrix that is already a correlation matrix up to
    /// rounding, rescaling so the diagonal is exactly one.
    pub(crate) fn from_spd_normalized(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let scale: Vec<f64> = (0..n).map(|i| m[(i, i)].sqrt()).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]) / (scale[i] * scale[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            m[(i, i)] = 1.0;
        }
        CorrelationMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_symmetric(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetric_part(self.0.clone())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `P C Pᵀ` where `P` maps node `perm[i]` to position `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        CorrelationMatrix(permute_symmetric(&self.0, perm))
    }

    /// Strict upper triangle, row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        upper_of(&self.0)
    }
}

pub(crate) fn permute_symmetric(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let n = m.nrows();
    assert_eq!(perm.len(), n);
    DMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])])
}

pub(crate) fn upper_of(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(triangular_len(n));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Symmetric matrix with zero diagonal, stored as its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct HollowSymmetricMatrix {
    n: usize,
    strict_upper: Vec<f64>,
}

impl HollowSymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        HollowSymmetricMatrix {
            n,
            strict_upper: vec![0.0; triangular_len(n)],
        }
    }

    pub fn from_upper(n: usize, strict_upper: Vec<f64>) -> Result<Self> {
        if strict_upper.len() != triangular_len(n) {
            return Err(Error::dims(triangular_len(n), strict_upper.len()));
        }
        Ok(HollowSymmetricMatrix { n, strict_upper })
    }

    /// Off-diagonal part of a square matrix (the upper triangle is read).
    pub fn off_diagonal_of(m: &DMatrix<f64>) -> Self {
        HollowSymmetricMatrix {
            n: m.nrows(),
            strict_upper: upper_of(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.strict_upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.strict_upper[strict_upper_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.strict_upper[strict_upper_index(self.n, j, i)],
        }
    }

    pub fn to_symmetric(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_upper_fn(self.n, |i, j| if i == j { 0.0 } else { self.get(i, j) })
    }

    pub fn scaled(&self, a: f64) -> Self {
        HollowSymmetricMatrix {
            n: self.n,
            strict_upper: self.strict_upper.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Frobenius norm of the full matrix.
    pub fn norm(&self) -> f64 {
        std::f64::consts::SQRT_2 * l2(&self.strict_upper)
    }

    /// Frobenius inner product of the full matrices.
    pub fn dot(&self, other: &Self) -> f64 {
        2.0 * self
            .strict_upper
            .iter()
            .zip(&other.strict_upper)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::dims(self.n, other.n));
        }
        Ok(HollowSymmetricMatrix {
            n: self.n,
            strict_upper: self
                .strict_upper
                .iter()
                .zip(&other.strict_upper)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Which geometry to use on the correlation manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    OffLog,
    Ecm,
    Lec,
    /// Raw entries with the Frobenius norm; a baseline, not a geometry.
    Euclidean,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::OffLog, Metric::Ecm, Metric::Lec, Metric::Euclidean];

    pub fn name(self) -> &'static str {
        match self {
            Metric::OffLog => "offlog",
            Metric::Ecm => "ecm",
            Metric::Lec => "lec",
            Metric::Euclidean => "euclidean",
        }
    }

    /// Weight applied to each stored coordinate difference.
    fn coordinate_weight(self) -> f64 {
        match self {
            Metric::OffLog | Metric::Euclidean => std::f64::consts::SQRT_2,
            Metric::Ecm | Metric::Lec => 1.0,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "offlog" | "off-log" | "off_log" => Ok(Metric::OffLog),
            "ecm" => Ok(Metric::Ecm),
            "lec" => Ok(Metric::Lec),
            "euclidean" | "raw" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidInput(format!("unknown metric `{other}`"))),
        }
    }
}

/// Flat chart coordinates of a correlation matrix under one metric.
///
/// `OffLog`/`Euclidean` store the strict upper triangle row-major;
/// `Ecm`/`Lec` store the strict lower triangle row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCoords {
    pub metric: Metric,
    pub n: usize,
    pub values: Vec<f64>,
}

impl FlatCoords {
    pub fn new(metric: Metric, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != triangular_len(n) {
            return Err(Error::dims(triangular_len(n), values.len()));
        }
        Ok(FlatCoords { metric, n, values })
    }

    pub fn zeros(metric: Metric, n: usize) -> Self {
        FlatCoords {
            metric,
            n,
            values: vec![0.0; triangular_len(n)],
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.metric != other.metric {
            return Err(Error::dims(self.metric, other.metric));
        }
        if self.n != other.n {
            return Err(Error::dims(self.n, other.n));
        }
        Ok(())
    }

    /// Riemannian distance between the underlying points.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(self.metric.coordinate_weight() * diff.sqrt())
    }

    /// `(1 − t)·self + t·other`.
    pub fn lerp(&self, other: &Self, t: f64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(FlatCoords {
            metric: self.metric,
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        })
    }

    pub fn mean(coords: &[FlatCoords]) -> Result<Self> {
        let first = coords.first().ok_or(Error::EmptyInput("coordinate list"))?;
        let mut acc = vec![0.0; first.values.len()];
        for c in coords {
            first.check_compatible(c)?;
            for (a, v) in acc.iter_mut().zip(&c.values) {
                *a += v;
            }
        }
        let m = coords.len() as f64;
        acc.iter_mut().for_each(|a| *a /= m);
        Ok(FlatCoords {
            metric: first.metric,
            n: first.n,
            values: acc,
        })
    }
}

/// Outcome of [`validate_or_shrink`].
#[derive(Debug, Clone)]
pub struct Validated {
    pub matrix: CorrelationMatrix,
    /// Shrinkage intensity γ applied, 0 when none was needed.
    pub shrinkage: f64,
    /// The diagonal deviated from 1 (within tolerance) and was rescaled.
    pub renormalized: bool,
    /// Largest asymmetry that was removed by symmetrization.
    pub asymmetry: f64,
}

/// Turns a raw square matrix into a [`CorrelationMatrix`].
///
/// The matrix is symmetrized (asymmetry up to [`SYMMETRY_TOL`]) and rescaled
/// to an exact unit diagonal (deviation up to [`DIAGONAL_TOL`]). If the
/// smallest eigenvalue is at or below [`RANK_DEFICIENT_EIGENVALUE`] and
/// `shrink_allowed`, the smallest γ of [`SHRINK_GRID`] with
/// `λ_min((1−γ)A + γI) >= SHRINK_TARGET_EIGENVALUE` is applied.
pub fn validate_or_shrink(a: &DMatrix<f64>, shrink_allowed: bool) -> Result<Validated> {
    let sym = SymmetricMatrix::new(a.clone(), SYMMETRY_TOL)?;
    let asymmetry = linalg::max_asymmetry(a);
    let n = sym.dim();
    let mut m = sym.into_inner();

    let mut renormalized = false;
    for i in 0..n {
        let v = m[(i, i)];
        if (v - 1.0).abs() > DIAGONAL_TOL + f64::EPSILON {
            return Err(Error::DiagonalNotUnit { index: i, value: v });
        }
        renormalized |= v != 1.0;
    }
    if renormalized {
        m = CorrelationMatrix::from_spd_normalized(m).into_inner();
    }

    let eig = linalg::sym_eig(&SymmetricMatrix::symmetric_part(m.clone()))?;
    let lambda_min = if n == 0 { 1.0 } else { eig.min() };
    if lambda_min > RANK_DEFICIENT_EIGENVALUE {
        return Ok(Validated {
            matrix: CorrelationMatrix(m),
            shrinkage: 0.0,
            renormalized,
            asymmetry,
        });
    }
    if !shrink_allowed {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lambda_min,
        });
    }
    let gamma = SHRINK_GRID
        .iter()
        .copied()
        .find(|&g| (1.0 - g) * lambda_min + g >= SHRINK_TARGET_EIGENVALUE)
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: lambda_min,
        })?;
    let mut shrunk = m * (1.0 - gamma);
    for i in 0..n {
        shrunk[(i, i)] = 1.0;
    }
    Ok(Validated {
        matrix: CorrelationMatrix(shrunk),
        shrinkage: gamma,
        renormalized,
        asymmetry,
    })
}

/// Chart coordinates of `c` under `metric`.
pub fn embed(c: &CorrelationMatrix, metric: Metric) -> Result<FlatCoords> {
    let n = c.dim();
    let values = match metric {
        Metric::OffLog => log_off(c)?.strict_upper,
        Metric::Ecm => cholesky_chart::ecm_coords(c)?,
        Metric::Lec => cholesky_chart::lec_coords(c)?,
        Metric::Euclidean => c.upper_triangle(),
    };
    Ok(FlatCoords { metric, n, values })
}

/// Inverse of [`embed`].
pub fn unembed(x: &FlatCoords) -> Result<CorrelationMatrix> {
    if x.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinates".into()));
    }
    match x.metric {
        Metric::OffLog => exp_off(&HollowSymmetricMatrix::from_upper(x.n, x.values.clone())?),
        Metric::Ecm => cholesky_chart::ecm_point(x.n, &x.values),
        Metric::Lec => cholesky_chart::lec_point(x.n, &x.values),
        Metric::Euclidean => {
            let h = HollowSymmetricMatrix::from_upper(x.n, x.values.clone())?;
            let m = h.to_symmetric().add_diagonal(&vec![1.0; x.n]).into_inner();
            validate_or_shrink(&m, false).map(|v| v.matrix)
        }
    }
}

fn check_same_dim(c1: &CorrelationMatrix, c2: &CorrelationMatrix) -> Result<()> {
    if c1.dim() != c2.dim() {
        return Err(Error::dims(c1.dim(), c2.dim()));
    }
    Ok(())
}

/// Geodesic distance under `metric`.
pub fn dist(c1: &CorrelationMatrix, c2: &CorrelationMatrix, metric: Metric) -> Result<f64> {
    check_same_dim(c1, c2)?;
    embed(c1, metric)?.distance(&embed(c2, metric)?)
}

/// Point at parameter `t` on the geodesic from `c1` (t = 0) to `c2` (t = 1).
pub fn geodesic(
    c1: &CorrelationMatrix,
    c2: &CorrelationMatrix,
    t: f64,
    metric: Metric,
) -> Result<CorrelationMatrix> {
    reject_euclidean(metric, "geodesics")?;
    check_same_dim(c1, c2)?;
    unembed(&embed(c1, metric)?.lerp(&embed(c2, metric)?, t)?)
}

/// Fréchet mean: the arithmetic mean in chart coordinates, mapped back.
pub fn frechet_mean(cs: &[CorrelationMatrix], metric: Metric) -> Result<CorrelationMatrix> {
    reject_euclidean(metric, "Fréchet means (use euclidean_mean)")?;
    let first = cs.first().ok_or(Error::EmptyInput("correlation matrix list"))?;
    let coords = cs
        .iter()
        .map(|c| {
            check_same_dim(first, c)?;
            embed(c, metric)
        })
        .collect::<Result<Vec<_>>>()?;
    unembed(&FlatCoords::mean(&coords)?)
}

/// Entrywise average, the baseline "mean" of raw correlation matrices.
pub fn euclidean_mean(cs: &[CorrelationMatrix]) -> Result<DMatrix<f64>> {
    let first = cs.first().ok_or(Error::EmptyInput("correlation matrix list"))?;
    let mut acc = DMatrix::zeros(first.dim(), first.dim());
    for c in cs {
        check_same_dim(first, c)?;
        acc += c.as_matrix();
    }
    Ok(acc / cs.len() as f64)
}

/// Tangent vector at the identity in the metric's global chart.
///
/// For `OffLog` this is the Lie-algebra element `Log_off(C)`; the Cholesky
/// charts are global too, so every metric returns its embedding.
pub fn tangent_at_identity(c: &CorrelationMatrix, metric: Metric) -> Result<FlatCoords> {
    embed(c, metric)
}

fn reject_euclidean(metric: Metric, operation: &'static str) -> Result<()> {
    if metric == Metric::Euclidean {
        return Err(Error::UnsupportedMetric {
            metric: metric.name(),
            operation,
        });
    }
    Ok(())
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_identity_untouched() {
        let v = validate_or_shrink(&DMatrix::identity(3, 3), true).unwrap();
        assert_eq!(v.shrinkage, 0.0);
        assert!(!v.renormalized);
        assert_eq!(v.matrix, CorrelationMatrix::identity(3));
    }

    #[test]
    fn validate_shrinks_rank_one() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        let v = validate_or_shrink(&ones, true).unwrap();
        assert_eq!(v.shrinkage, 1e-6);
        let eig = linalg::sym_eig(&v.matrix.to_symmetric()).unwrap();
        assert!(eig.min() >= SHRINK_TARGET_EIGENVALUE);
        assert_abs_diff_eq!(eig.min(), 1e-6, epsilon = 1e-12);
        assert!((0..3).all(|i| v.matrix.get(i, i) == 1.0));

        assert!(matches!(
            validate_or_shrink(&ones, false),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn validate_rejects_indefinite_even_with_shrinkage() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]);
        match validate_or_shrink(&m, true) {
            Err(Error::NotPositiveDefinite { min_eigenvalue }) => {
                assert_abs_diff_eq!(min_eigenvalue, -0.5, epsilon = 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_diagonal_rules() {
        let m = DMatrix::from_row_slice(2, 2, &[0.999999, 0.3, 0.3, 1.0]);
        let v = validate_or_shrink(&m, false).unwrap();
        assert!(v.renormalized);
        assert_eq!(v.matrix.get(0, 0), 1.0);

        let m = DMatrix::from_row_slice(2, 2, &[0.99, 0.3, 0.3, 1.0]);
        assert!(matches!(
            validate_or_shrink(&m, true),
            Err(Error::DiagonalNotUnit { index: 0, .. })
        ));

        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.30001, 1.0]);
        assert!(matches!(
            validate_or_shrink(&m, true),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn embed_identity_is_zero() {
        for m in Metric::ALL {
            let x = embed(&CorrelationMatrix::identity(4), m).unwrap();
            assert!(x.values.iter().all(|v| v.abs() < 1e-15), "{m}");
        }
    }

    #[test]
    fn ecm_and_lec_two_by_two() {
        let c = CorrelationMatrix::pair(0.6).unwrap();
        for m in [Metric::Ecm, Metric::Lec] {
            let x = embed(&c, m).unwrap();
            assert_abs_diff_eq!(x.values[0], 0.75, epsilon = 1e-15);
            let back = unembed(&FlatCoords::new(m, 2, vec![0.75]).unwrap()).unwrap();
            assert_abs_diff_eq!(back.get(0, 1), 0.6, epsilon = 1e-15);
        }
    }

    #[test]
    fn unembed_zero_is_identity() {
        for m in Metric::ALL {
            let c = unembed(&FlatCoords::zeros(m, 5)).unwrap();
            assert!((c.as_matrix() - DMatrix::<f64>::identity(5, 5)).amax() < 1e-15);
        }
    }

    #[test]
    fn euclidean_unembed_can_fail() {
        // Entrywise values that are not a correlation matrix.
        let x = FlatCoords::new(Metric::Euclidean, 3, vec![0.9, 0.9, -0.9]).unwrap();
        assert!(matches!(
            unembed(&x),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn distance_closed_forms() {
        let c1 = CorrelationMatrix::pair(0.6).unwrap();
        let c2 = CorrelationMatrix::pair(0.2).unwrap();
        let expected = std::f64::consts::SQRT_2 * (0.6f64.atanh() - 0.2f64.atanh()).abs();
        assert_abs_diff_eq!(dist(&c1, &c2, Metric::OffLog).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.693551, epsilon = 1e-6);

        let c0 = CorrelationMatrix::identity(2);
        assert_abs_diff_eq!(dist(&c1, &c0, Metric::Ecm).unwrap(), 0.75, epsilon = 1e-15);
        for m in Metric::ALL {
            assert_eq!(dist(&c1, &c1, m).unwrap(), 0.0);
        }
        assert!(matches!(
            dist(&c1, &CorrelationMatrix::identity(3), Metric::OffLog),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn geodesic_midpoint_closed_form() {
        let c1 = CorrelationMatrix::pair(0.6).unwrap();
        let c2 = CorrelationMatrix::pair(0.2).unwrap();
        let mid = geodesic(&c1, &c2, 0.5, Metric::OffLog).unwrap();
        let expected = (0.5 * (0.6f64.atanh() + 0.2f64.atanh())).tanh();
        assert_abs_diff_eq!(mid.get(0, 1), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.420204, epsilon = 1e-6);

        let start = geodesic(&c1, &c2, 0.0, Metric::Lec).unwrap();
        assert!((start.as_matrix() - c1.as_matrix()).amax() < 1e-12);
        let end = geodesic(&c1, &c2, 1.0, Metric::Ecm).unwrap();
        assert!((end.as_matrix() - c2.as_matrix()).amax() < 1e-12);

        assert!(matches!(
            geodesic(&c1, &c2, 0.5, Metric::Euclidean),
            Err(Error::UnsupportedMetric { .. })
        ));
    }

    #[test]
    fn frechet_mean_examples() {
        let c1 = CorrelationMatrix::pair(0.6).unwrap();
        let c2 = CorrelationMatrix::pair(0.2).unwrap();
        let m = frechet_mean(&[c1.clone(), c2], Metric::OffLog).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 0.420204, epsilon = 1e-6);

        let single = frechet_mean(std::slice::from_ref(&c1), Metric::Lec).unwrap();
        assert!((single.as_matrix() - c1.as_matrix()).amax() < 1e-12);

        let c = CorrelationMatrix::try_new(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.3, -0.2, 0.3, 1.0, 0.5, -0.2, 0.5, 1.0],
        ))
        .unwrap();
        let inv = star_inverse(&c).unwrap();
        let m = frechet_mean(&[c, inv], Metric::OffLog).unwrap();
        assert!((m.as_matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);

        assert!(matches!(
            frechet_mean(&[], Metric::OffLog),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn tangent_matches_atanh() {
        let x = tangent_at_identity(&CorrelationMatrix::pair(0.5).unwrap(), Metric::OffLog).unwrap();
        assert_abs_diff_eq!(x.values[0], 0.549306, epsilon = 1e-6);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("airm".parse::<Metric>().is_err());
    }

    #[test]
    fn hollow_norm_counts_both_triangles() {
        let h = HollowSymmetricMatrix::from_upper(3, vec![1.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(h.norm(), h.to_symmetric().norm(), epsilon = 1e-14);
        assert_abs_diff_eq!(h.dot(&h), h.norm().powi(2), epsilon = 1e-12);
    }
}
