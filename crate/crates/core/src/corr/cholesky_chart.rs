//! Charts built on the row-normalized Cholesky factor `L̃ = Diag(L)⁻¹ L`.

use nalgebra::DMatrix;

use super::CorrelationMatrix;
use crate::error::Result;
use crate::linalg::{self, tri_unit_exp, tri_unit_log, StrictLowerTriangular, UnitLowerTriangular};

fn normalized_factor(c: &CorrelationMatrix) -> Result<UnitLowerTriangular> {
    let mut l = linalg::cholesky(&c.to_symmetric())?;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        l.row_mut(i).unscale_mut(d);
    }
    Ok(UnitLowerTriangular::from_lower_of(&l))
}

/// `L L̃ᵀ` after scaling each row of `L̃` to unit length.
fn from_factor(l_tilde: &UnitLowerTriangular) -> CorrelationMatrix {
    let mut l: DMatrix<f64> = l_tilde.to_dense();
    for i in 0..l.nrows() {
        let norm = l.row(i).norm();
        l.row_mut(i).unscale_mut(norm);
    }
    CorrelationMatrix::from_spd_normalized(&l * l.transpose())
}

pub(super) fn ecm_coords(c: &CorrelationMatrix) -> Result<Vec<f64>> {
    Ok(normalized_factor(c)?.into_strict_lower())
}

pub(super) fn lec_coords(c: &CorrelationMatrix) -> Result<Vec<f64>> {
    Ok(tri_unit_log(&normalized_factor(c)?).into_strict_lower())
}

pub(super) fn ecm_point(n: usize, values: &[f64]) -> Result<CorrelationMatrix> {
    Ok(from_factor(&UnitLowerTriangular::new(n, values.to_vec())?))
}

pub(super) fn lec_point(n: usize, values: &[f64]) -> Result<CorrelationMatrix> {
    let s = StrictLowerTriangular::new(n, values.to_vec())?;
    Ok(from_factor(&tri_unit_exp(&s)))
}
