//! The four representations side by side, plus the 2 × 2 closed form
//! `d_off(C(ρ₁), C(ρ₂)) = √2 |atanh ρ₁ − atanh ρ₂|`.

use corrgeo::corr::{dist, embed, geodesic};
use corrgeo::synth::random_correlation;
use corrgeo::{CorrelationMatrix, Metric};

fn main() -> corrgeo::Result<()> {
    let (r1, r2) = (0.6, 0.2);
    let (c1, c2) = (CorrelationMatrix::pair(r1)?, CorrelationMatrix::pair(r2)?);
    let closed = 2f64.sqrt() * (r1.atanh() - r2.atanh()).abs();
    println!("2x2: offlog {:.12}  closed form {closed:.12}", dist(&c1, &c2, Metric::OffLog)?);
    let mid = geodesic(&c1, &c2, 0.5, Metric::OffLog)?;
    println!("2x2 Off–log midpoint ρ = {:.7}", mid.get(0, 1));

    let a = random_correlation(8, 0.5, 7)?;
    let b = random_correlation(8, 0.5, 8)?;
    // A node relabelling moves ECM/LEC distances but not Off–log ones.
    let perm: Vec<usize> = (0..8).rev().collect();
    println!("{:>10} {:>8} {:>12} {:>12}", "metric", "coords", "d(A,B)", "d(PA,PB)");
    for m in Metric::ALL {
        let d = dist(&a, &b, m)?;
        let dp = dist(&a.permuted(&perm), &b.permuted(&perm), m)?;
        println!("{:>10} {:>8} {d:>12.6} {dp:>12.6}", m.name(), embed(&a, m)?.values.len());
    }
    Ok(())
}
