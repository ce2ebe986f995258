//! Geometry of the Grassmannian `Gr(k, n)`: principal angles, the geodesic
//! distance, the Riemannian exponential and logarithm, and Karcher means.
//!
//! A point is an `n × k` orthonormal basis; any `U Q` with `Q` orthogonal
//! represents the same subspace. Distances from a sample to a reference are
//! evaluated through the sample's projector `U Uᵀ`, which makes them exactly
//! (bitwise) insensitive to column sign flips of the sample.

mod discriminant;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, svd_thin};

pub use discriminant::{
    classify_nearest_center, fisher_fit, fisher_ratio, region_importance, DiscriminantModel,
    FisherOptions,
};

/// Orthonormality tolerance for [`GrassmannPoint::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// `XᵀY` singular values at or below this make `Log_X(Y)` undefined.
pub const CUT_LOCUS_COSINE: f64 = 1e-10;
pub const KARCHER_TOL: f64 = 1e-9;
pub const KARCHER_MAX_ITER: usize = 200;

/// A `k`-dimensional subspace of `ℝⁿ`, stored as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    basis: DMatrix<f64>,
}

impl GrassmannPoint {
    /// Accepts a basis with `BᵀB = I` within [`ORTHONORMAL_TOL`].
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k > n {
            return Err(Error::InvalidInput(format!(
                "basis must be n×k with 1 <= k <= n, got {n}×{k}"
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite basis entry".into()));
        }
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::<f64>::identity(k, k)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!(
                "basis columns are not orthonormal (error {err:e})"
            )));
        }
        Ok(GrassmannPoint { basis })
    }

    /// Orthonormal basis of the column span of `m` (which must have full column rank).
    pub fn from_span(m: &DMatrix<f64>) -> Result<Self> {
        let s = linalg::singular_values(m);
        if s.last().is_none_or(|&v| v <= 1e-12 * s[0].max(1.0)) {
            return Err(Error::InvalidInput("spanning set is rank deficient".into()));
        }
        Self::new(linalg::orthonormalize(m))
    }

    pub(crate) fn from_orthonormal_unchecked(basis: DMatrix<f64>) -> Self {
        GrassmannPoint { basis }
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension `k`.
    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projector `U Uᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Same subspace with basis `U Q`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.shape() != (self.k(), self.k()) {
            return Err(Error::dims(format!("{0}×{0}", self.k()), format!("{}×{}", q.nrows(), q.ncols())));
        }
        Self::new(&self.basis * q)
    }

    /// Same subspace with the listed columns negated.
    pub fn sign_flipped(&self, flip: &[bool]) -> Self {
        let mut b = self.basis.clone();
        for (j, &f) in flip.iter().enumerate().take(self.k()) {
            if f {
                b.column_mut(j).neg_mut();
            }
        }
        GrassmannPoint { basis: b }
    }

    /// Row-major flattening of the basis (the naive vector representation).
    pub fn flatten(&self) -> Vec<f64> {
        let (n, k) = self.basis.shape();
        (0..n).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| self.basis[(i, j)]).collect()
    }
}

fn check_same_shape(u: &GrassmannPoint, v: &GrassmannPoint) -> Result<()> {
    if u.basis.shape() != v.basis.shape() {
        return Err(Error::dims(
            format!("Gr({}, {})", v.k(), v.n()),
            format!("Gr({}, {})", u.k(), u.n()),
        ));
    }
    Ok(())
}

/// Principal angles between `span U` and `span V`, ascending in `[0, π/2]`.
///
/// Cosines are the singular values of `P_U V` (equal to those of `UᵀV`) and
/// sines those of `V − P_U V`. Each angle is read from whichever of the two
/// is better conditioned: `arcsin` for small angles, `arccos` for large ones.
pub fn principal_angles(u: &GrassmannPoint, v: &GrassmannPoint) -> Result<Vec<f64>> {
    check_same_shape(u, v)?;
    Ok(angles_with_projector(&u.projector(), &v.basis))
}

fn angles_with_projector(p_u: &DMatrix<f64>, v: &DMatrix<f64>) -> Vec<f64> {
    let along = p_u * v;
    let across = v - &along;
    let cosines = linalg::singular_values(&along);
    let mut sines = linalg::singular_values(&across);
    sines.reverse();
    cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| {
            let c = c.clamp(0.0, 1.0);
            let s = s.clamp(0.0, 1.0);
            if c * c >= 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect()
}

/// Geodesic distance `(Σ θ²)^{1/2}`.
pub fn grassmann_dist(u: &GrassmannPoint, v: &GrassmannPoint) -> Result<f64> {
    Ok(grassmann_dist_sq(u, v)?.sqrt())
}

pub(crate) fn grassmann_dist_sq(u: &GrassmannPoint, v: &GrassmannPoint) -> Result<f64> {
    check_same_shape(u, v)?;
    Ok(dist_sq_with_projector(&u.projector(), &v.basis))
}

pub(crate) fn dist_sq_with_projector(p_u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    angles_with_projector(p_u, v).iter().map(|t| t * t).sum()
}

/// Riemannian logarithm `Log_X(Y)`, an `n × k` matrix with `XᵀH = 0`.
pub fn grassmann_log(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<DMatrix<f64>> {
    log_with_floor(x, y, CUT_LOCUS_COSINE)
}

fn log_with_floor(x: &GrassmannPoint, y: &GrassmannPoint, min_cosine: f64) -> Result<DMatrix<f64>> {
    check_same_shape(x, y)?;
    let m = x.basis.transpose() * &y.basis;
    let sigma = linalg::singular_values(&m);
    let smallest = sigma.last().copied().unwrap_or(0.0);
    if smallest <= min_cosine {
        return Err(Error::CutLocus {
            min_cosine: smallest,
        });
    }
    let m_inv = m.clone().try_inverse().ok_or(Error::CutLocus {
        min_cosine: smallest,
    })?;
    let perp = &y.basis - &x.basis * &m;
    let t = perp * m_inv;
    let svd = svd_thin(&t);
    let mut u = svd.u;
    for (j, s) in svd.singular_values.iter().enumerate() {
        u.column_mut(j).scale_mut(s.atan());
    }
    Ok(u * svd.v.transpose())
}

/// Riemannian exponential `Exp_X(H)`.
pub fn grassmann_exp(x: &GrassmannPoint, h: &DMatrix<f64>) -> Result<GrassmannPoint> {
    if h.shape() != x.basis.shape() {
        return Err(Error::dims(
            format!("{}×{}", x.n(), x.k()),
            format!("{}×{}", h.nrows(), h.ncols()),
        ));
    }
    let horizontal = (x.basis.transpose() * h).amax();
    if horizontal > 1e-8 * h.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "tangent is not horizontal (|XᵀH| = {horizontal:e})"
        )));
    }
    let svd = svd_thin(h);
    let v = &svd.v;
    let mut xv_cos = &x.basis * v;
    let mut u_sin = svd.u.clone();
    for (j, s) in svd.singular_values.iter().enumerate() {
        xv_cos.column_mut(j).scale_mut(s.cos());
        u_sin.column_mut(j).scale_mut(s.sin());
    }
    let y = (xv_cos + u_sin) * v.transpose();
    Ok(GrassmannPoint::from_orthonormal_unchecked(linalg::orthonormalize(&y)))
}

/// Karcher mean by the fixed-step flow `C ← Exp_C(mean_i Log_C(U_i))`,
/// started at the first point.
///
/// Points within `1e-6` rad of being orthogonal to the current iterate in
/// some direction raise [`Error::CutLocus`].
pub fn karcher_mean(points: &[GrassmannPoint], tol: f64, max_iter: usize) -> Result<GrassmannPoint> {
    let first = points.first().ok_or(Error::EmptyInput("subspace list"))?;
    for p in points {
        check_same_shape(first, p)?;
    }
    let floor = 1e-6f64.sin();
    let mut c = first.clone();
    let mut grad_norm = f64::INFINITY;
    for _ in 0..=max_iter {
        let g = mean_log(&c, points, floor)?;
        grad_norm = g.norm();
        if grad_norm <= tol {
            return Ok(c);
        }
        c = grassmann_exp(&c, &g)?;
    }
    Err(Error::NoConvergence {
        what: "Karcher mean",
        iterations: max_iter,
        residual: grad_norm,
    })
}

fn mean_log(c: &GrassmannPoint, points: &[GrassmannPoint], floor: f64) -> Result<DMatrix<f64>> {
    let mut acc = DMatrix::zeros(c.n(), c.k());
    for p in points {
        acc += log_with_floor(c, p, floor)?;
    }
    Ok(acc / points.len() as f64)
}
