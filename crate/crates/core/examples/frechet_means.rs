//! Fréchet means under each geometry against the entrywise average, for two
//! nearly singular inputs. The smallest eigenvalue shows how close each mean
//! comes to the boundary of the full-rank set.

use corrgeo::corr::{euclidean_mean, frechet_mean, validate_or_shrink};
use corrgeo::{CorrelationMatrix, Metric};
use nalgebra::DMatrix;

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

fn main() -> corrgeo::Result<()> {
    let build = |r: f64| -> corrgeo::Result<CorrelationMatrix> {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, r, r * r, r, 1.0, r, r * r, r, 1.0]);
        Ok(validate_or_shrink(&m, false)?.matrix)
    };
    let cs = vec![build(0.999)?, build(-0.999)?];

    let avg = euclidean_mean(&cs)?;
    println!("entrywise mean: λ_min = {:.3e}", min_eigenvalue(&avg));
    for m in [Metric::OffLog, Metric::Ecm, Metric::Lec] {
        let mean = frechet_mean(&cs, m)?;
        println!("{:>7} mean: λ_min = {:.3e}", m.name(), min_eigenvalue(mean.as_matrix()));
    }
    Ok(())
}
