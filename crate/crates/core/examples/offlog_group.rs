//! Off–log chart: round trip, the ⋆ group law and its invariant distance.

use corrgeo::corr::{dist, exp_off, log_off, star_inverse, star_product};
use corrgeo::synth::random_correlation;
use corrgeo::{CorrelationMatrix, Metric};

fn main() -> corrgeo::Result<()> {
    let a = random_correlation(6, 0.6, 1)?;
    let b = random_correlation(6, 0.6, 2)?;
    let g = random_correlation(6, 0.6, 3)?;

    let s = log_off(&a)?;
    let back = exp_off(&s)?;
    let err = (back.as_matrix() - a.as_matrix()).abs().max();
    println!("round trip max error      {err:.2e}");

    let id = CorrelationMatrix::identity(6);
    let e = star_product(&a, &star_inverse(&a)?)?;
    println!("dist(A ⋆ A⁻¹, I)          {:.2e}", dist(&e, &id, Metric::OffLog)?);

    let ab = star_product(&a, &b)?;
    let ba = star_product(&b, &a)?;
    println!("dist(A ⋆ B, B ⋆ A)        {:.2e}", dist(&ab, &ba, Metric::OffLog)?);

    let d = dist(&a, &b, Metric::OffLog)?;
    let dg = dist(&star_product(&g, &a)?, &star_product(&g, &b)?, Metric::OffLog)?;
    println!("d(A, B) = {d:.6}   d(G⋆A, G⋆B) = {dg:.6}");
    Ok(())
}
