//! Dense symmetric and triangular matrix kernels.
//!
//! Everything geometric in this crate reduces to a handful of operations on
//! small dense matrices: a symmetric eigendecomposition (which also provides
//! the matrix logarithm and exponential), a Cholesky factorization, a thin
//! SVD, and the logarithm/exponential of unit lower-triangular matrices.
//! Matrix functions go through the full spectral decomposition, so `log` and
//! `exp` of the same matrix share one eigensolve.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative eigenvalue floor used when deciding positive definiteness.
pub const PD_RELATIVE_TOL: f64 = 1e-12;

/// A real symmetric matrix whose storage is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Checks `m` is square, finite and symmetric within `tol` (absolute),
    /// then stores its symmetric part.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_square_finite(&m)?;
        let asym = max_asymmetry(&m);
        if asym > tol {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(Self::symmetric_part(m))
    }

    /// `(m + mᵀ)/2`. Panics if `m` is not square.
    pub fn symmetric_part(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetric_part of a non-square matrix");
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymmetricMatrix(out)
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Builds the matrix from the upper triangle produced by `f(i, j)`, `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix(m)
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Adds `d` to the diagonal.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.dim());
        let mut m = self.0.clone();
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] += v;
        }
        SymmetricMatrix(m)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: DMatrix<f64>,
}

impl SymEigen {
    /// `V f(Λ) Vᵀ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        SymmetricMatrix::symmetric_part(scaled * v.transpose())
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    fn check_positive(&self) -> Result<()> {
        if self.eigenvalues.is_empty() {
            return Ok(());
        }
        let floor = PD_RELATIVE_TOL * self.max().abs();
        if !(self.min() > floor && self.min() > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: self.min(),
            });
        }
        Ok(())
    }
}

/// Symmetric eigendecomposition with ascending eigenvalues.
pub fn sym_eig(a: &SymmetricMatrix) -> Result<SymEigen> {
    if a.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let n = a.dim();
    if n == 0 {
        return Ok(SymEigen {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal logarithm of a symmetric positive-definite matrix.
pub fn sym_logm(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eig(a)?;
    eig.check_positive()?;
    Ok(eig.apply(f64::ln))
}

/// Exponential of a symmetric matrix.
pub fn sym_expm(s: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    Ok(sym_eig(s)?.apply(f64::exp))
}

/// Lower Cholesky factor `L` with `L Lᵀ = A` and positive diagonal.
pub fn cholesky(a: &SymmetricMatrix) -> Result<DMatrix<f64>> {
    let n = a.dim();
    let m = &a.0;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: pivot.min(0.0),
            });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Position of `(i, j)`, `i > j`, in row-major strict-lower storage.
#[inline]
pub fn strict_lower_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}

/// Position of `(i, j)`, `i < j`, in row-major strict-upper storage.
#[inline]
pub fn strict_upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn triangular_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lower-triangular matrix with unit diagonal; only the strict lower part is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitLowerTriangular {
    n: usize,
    strict_lower: Vec<f64>,
}

/// Lower-triangular matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictLowerTriangular {
    n: usize,
    strict_lower: Vec<f64>,
}

macro_rules! impl_lower_storage {
    ($t:ty, $diag:expr) => {
        impl $t {
            pub fn new(n: usize, strict_lower: Vec<f64>) -> Result<Self> {
                if strict_lower.len() != triangular_len(n) {
                    return Err(Error::dims(triangular_len(n), strict_lower.len()));
                }
                Ok(Self { n, strict_lower })
            }

            pub fn zeros(n: usize) -> Self {
                Self {
                    n,
                    strict_lower: vec![0.0; triangular_len(n)],
                }
            }

            /// Reads the strict lower part of `m`; the rest is ignored.
            pub fn from_lower_of(m: &DMatrix<f64>) -> Self {
                let n = m.nrows();
                let mut strict_lower = Vec::with_capacity(triangular_len(n));
                for i in 1..n {
                    for j in 0..i {
                        strict_lower.push(m[(i, j)]);
                    }
                }
                Self { n, strict_lower }
            }

            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn strict_lower(&self) -> &[f64] {
                &self.strict_lower
            }

            pub fn into_strict_lower(self) -> Vec<f64> {
                self.strict_lower
            }

            pub fn to_dense(&self) -> DMatrix<f64> {
                let mut m = DMatrix::from_diagonal_element(self.n, self.n, $diag);
                for i in 1..self.n {
                    for j in 0..i {
                        m[(i, j)] = self.strict_lower[strict_lower_index(i, j)];
                    }
                }
                m
            }
        }
    };
}

impl_lower_storage!(UnitLowerTriangular, 1.0);
impl_lower_storage!(StrictLowerTriangular, 0.0);

/// Dense row-major strictly lower nilpotent matrix used by the series below.
struct Nilpotent {
    n: usize,
    data: Vec<f64>,
}

impl Nilpotent {
    fn from_strict_lower(n: usize, strict_lower: &[f64]) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 1..n {
            for j in 0..i {
                data[i * n + j] = strict_lower[strict_lower_index(i, j)];
            }
        }
        Nilpotent { n, data }
    }

    /// `self^k · base` when `self = base^k`; only the band `i - j >= k + 1`
    /// can be nonzero, so only that band is computed.
    fn next_power(&self, base: &Nilpotent, k: usize) -> Nilpotent {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in (k + 1)..n {
            for j in 0..(i - k) {
                // self[i][l] needs i - l >= k, base[l][j] needs l - j >= 1.
                let mut s = 0.0;
                for l in (j + 1)..=(i - k) {
                    s += self.data[i * n + l] * base.data[l * n + j];
                }
                out[i * n + j] = s;
            }
        }
        Nilpotent { n, data: out }
    }

    fn series(&self, coeff: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut acc = vec![0.0; triangular_len(n)];
        let mut power = Nilpotent {
            n,
            data: self.data.clone(),
        };
        for k in 1..n {
            if k > 1 {
                power = power.next_power(self, k - 1);
            }
            let c = coeff(k);
            for i in k..n {
                for j in 0..=(i - k) {
                    acc[strict_lower_index(i, j)] += c * power.data[i * n + j];
                }
            }
        }
        acc
    }
}

/// Logarithm of a unit lower-triangular matrix, `log(I + N) = Σ (−1)^{k+1} N^k / k`
/// summed exactly over the `n − 1` nonzero powers of `N`.
pub fn tri_unit_log(l: &UnitLowerTriangular) -> StrictLowerTriangular {
    let nil = Nilpotent::from_strict_lower(l.n, &l.strict_lower);
    let sl = nil.series(|k| (if k % 2 == 1 { 1.0 } else { -1.0 }) / k as f64);
    StrictLowerTriangular {
        n: l.n,
        strict_lower: sl,
    }
}

/// Exponential of a strictly lower-triangular matrix, `Σ_{k<n} S^k / k!`.
pub fn tri_unit_exp(s: &StrictLowerTriangular) -> UnitLowerTriangular {
    let nil = Nilpotent::from_strict_lower(s.n, &s.strict_lower);
    let sl = nil.series(|k| 1.0 / factorial(k));
    UnitLowerTriangular {
        n: s.n,
        strict_lower: sl,
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Thin SVD `M = U Σ Vᵀ` of an `n × k` matrix with `k <= n`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `n × k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Descending, nonnegative.
    pub singular_values: DVector<f64>,
    /// `k × k` orthogonal (not transposed).
    pub v: DMatrix<f64>,
}

pub fn svd_thin(m: &DMatrix<f64>) -> ThinSvd {
    let (n, k) = m.shape();
    assert!(k <= n, "svd_thin expects a tall matrix, got {n}x{k}");
    if k == 0 {
        return ThinSvd {
            u: DMatrix::zeros(n, 0),
            singular_values: DVector::zeros(0),
            v: DMatrix::zeros(0, 0),
        };
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let mut u_sorted = DMatrix::zeros(n, k);
    let mut v_sorted = DMatrix::zeros(k, k);
    let mut s_sorted = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).transpose());
        s_sorted[dst] = sv[src].max(0.0);
    }
    ThinSvd {
        u: u_sorted,
        singular_values: s_sorted,
        v: v_sorted,
    }
}

/// Singular values only, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .singular_values()
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the column span: Gram–Schmidt with one round of
/// reorthogonalization, so the implied `R` has a positive diagonal and an
/// already orthonormal input comes back unchanged up to rounding.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let r = q.column(i).dot(&q.column(j));
                let qi = q.column(i).clone_owned();
                q.column_mut(j).axpy(-r, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims(
            format!("square matrix"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(())
}
