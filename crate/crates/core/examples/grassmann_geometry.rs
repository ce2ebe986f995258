//! Principal angles, log/exp and the Karcher mean on Gr(k, n).

use corrgeo::grassmann::{grassmann_dist, grassmann_exp, grassmann_log, karcher_mean, principal_angles, KARCHER_MAX_ITER, KARCHER_TOL};
use corrgeo::GrassmannPoint;
use nalgebra::DMatrix;

fn main() -> corrgeo::Result<()> {
    let n = 5;
    let line = |theta: f64| GrassmannPoint::from_span(&DMatrix::from_fn(n, 1, |i, _| match i {
        0 => theta.cos(),
        1 => theta.sin(),
        _ => 0.0,
    }));
    let (x, y) = (line(0.0)?, line(0.9)?);
    println!("angles {:?}  dist {:.6}", principal_angles(&x, &y)?, grassmann_dist(&x, &y)?);

    let h = grassmann_log(&x, &y)?;
    let back = grassmann_exp(&x, &h)?;
    println!("exp(log) error {:.2e}", grassmann_dist(&back, &y)?);

    let mid = karcher_mean(&[x.clone(), y.clone()], KARCHER_TOL, KARCHER_MAX_ITER)?;
    println!("midpoint distances {:.9} {:.9}", grassmann_dist(&mid, &x)?, grassmann_dist(&mid, &y)?);

    // Distances ignore the choice of basis.
    let flipped = y.sign_flipped(&[true]);
    println!("sign flip drift {:.1e}", (grassmann_dist(&x, &flipped)? - grassmann_dist(&x, &y)?).abs());
    Ok(())
}
