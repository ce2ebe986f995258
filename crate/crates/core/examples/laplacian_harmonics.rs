//! Thresholded connectivity graph, normalized Laplacian spectrum and the
//! spectral gap used to pick the subspace dimension.

use corrgeo::graph::{adjacency_from_correlation, gap_spectrum, gap_spectrum_select_k, laplacian_spectrum, low_frequency_subspace};
use corrgeo::synth::{community_cohort, CommunitySpec};

fn main() -> corrgeo::Result<()> {
    let cohort = community_cohort(&CommunitySpec { m_per_group: 1, ..CommunitySpec::default() })?;
    let c = &cohort.subjects()[0].matrix;
    let g = adjacency_from_correlation(c, 0.2)?;
    let spec = laplacian_spectrum(&g)?;
    let k = gap_spectrum_select_k(&spec, 10)?;
    println!("edges {}  isolated {:?}", g.edge_count(), g.isolated_nodes());
    println!("eigenvalues {:.4?}", &spec.eigenvalues[..8]);
    println!("gaps        {:.4?}", &gap_spectrum(&spec)[..7]);
    println!("selected k = {k}");
    let u = low_frequency_subspace(&spec, k)?;
    println!("subspace basis {} × {}", u.n(), u.k());
    Ok(())
}
