//! Weighted graphs from correlation matrices, normalized Laplacian spectra,
//! and choice of the low-frequency subspace dimension from eigenvalue gaps.

use nalgebra::{DMatrix, DVector};

use crate::corr::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::linalg::{self, SymmetricMatrix};

pub const DEFAULT_DENSITY: f64 = 0.2;
pub const DEFAULT_J_MAX: usize = 30;
/// Eigenvalues outside `[0, 2]` by more than this are reported as an error.
const SPECTRUM_SLACK: f64 = 1e-10;
const GAP_TIE_TOL: f64 = 1e-12;

/// Nonnegative symmetric weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DMatrix<f64>,
}

impl WeightedGraph {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::dims("square matrix", format!("{}×{}", weights.nrows(), weights.ncols())));
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("graph has a self-loop at node {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::InvalidInput(format!("invalid edge weight {w} at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::NotSymmetric {
                        max_asymmetry: (w - weights[(j, i)]).abs(),
                    });
                }
            }
        }
        Ok(WeightedGraph { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.weights.row_iter().map(|r| r.sum()).collect()
    }

    pub fn isolated_nodes(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.weights[(i, j)] > 0.0)
            .count()
    }

    /// Entrywise mean of several graphs on the same nodes.
    pub fn mean(graphs: &[WeightedGraph]) -> Result<Self> {
        let first = graphs.first().ok_or(Error::EmptyInput("graph list"))?;
        let mut acc = DMatrix::zeros(first.n(), first.n());
        for g in graphs {
            if g.n() != first.n() {
                return Err(Error::dims(first.n(), g.n()));
            }
            acc += &g.weights;
        }
        Ok(WeightedGraph {
            weights: acc / graphs.len() as f64,
        })
    }
}

/// Eigenpairs of a normalized Laplacian, eigenvalues ascending in `[0, 2]`.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns in eigenvalue order.
    pub eigenvectors: DMatrix<f64>,
}

/// Proportional thresholding: zero negative correlations, then keep the
/// `⌈density · n(n−1)/2⌉` strongest positive edges. Edges tied with the
/// weakest kept edge are all kept.
pub fn adjacency_from_correlation(c: &CorrelationMatrix, density: f64) -> Result<WeightedGraph> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!("density must lie in (0, 1], got {density}")));
    }
    let n = c.dim();
    let total = n * n.saturating_sub(1) / 2;
    let keep = ((density * total as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut positive: Vec<f64> = c.upper_triangle().into_iter().filter(|&w| w > 0.0).collect();
    let threshold = if keep == 0 {
        f64::INFINITY
    } else if keep >= positive.len() {
        0.0
    } else {
        positive.sort_by(|a, b| b.total_cmp(a));
        positive[keep - 1]
    };
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = c.get(i, j);
            if v > 0.0 && v >= threshold {
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Ok(WeightedGraph { weights: w })
}

/// `I − D^{−1/2} W D^{−1/2}` with zero rows and columns for isolated nodes.
pub fn normalized_laplacian(g: &WeightedGraph) -> SymmetricMatrix {
    let n = g.n();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    SymmetricMatrix::from_upper_fn(n, |i, j| {
        if i == j {
            if inv_sqrt[i] > 0.0 { 1.0 } else { 0.0 }
        } else {
            -g.weights[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
        }
    })
}

/// Spectrum of the normalized Laplacian, clamped into `[0, 2]`.
pub fn laplacian_spectrum(g: &WeightedGraph) -> Result<LaplacianSpectrum> {
    let eig = linalg::sym_eig(&normalized_laplacian(g))?;
    let mut eigenvalues = Vec::with_capacity(g.n());
    for &l in eig.eigenvalues.iter() {
        if !(-SPECTRUM_SLACK..=2.0 + SPECTRUM_SLACK).contains(&l) {
            return Err(Error::InvalidInput(format!(
                "Laplacian eigenvalue {l} outside [0, 2]"
            )));
        }
        eigenvalues.push(l.clamp(0.0, 2.0));
    }
    Ok(LaplacianSpectrum {
        eigenvalues,
        eigenvectors: eig.eigenvectors,
    })
}

/// `g_j = λ_{j+1} − λ_j` for `j = 1..n−1`.
pub fn gap_spectrum(spec: &LaplacianSpectrum) -> Vec<f64> {
    spec.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `min(30, n − 1)`.
pub fn default_j_max(n: usize) -> usize {
    DEFAULT_J_MAX.min(n.saturating_sub(1))
}

/// `argmax_{1 ≤ j ≤ j_max} g_j` (1-based), the smallest index among ties.
pub fn gap_spectrum_select_k(spec: &LaplacianSpectrum, j_max: usize) -> Result<usize> {
    let gaps = gap_spectrum(spec);
    if j_max == 0 || j_max > gaps.len() {
        return Err(Error::InvalidInput(format!(
            "j_max must lie in 1..={}, got {j_max}",
            gaps.len()
        )));
    }
    let mut best = 0;
    for j in 1..j_max {
        if gaps[j] > gaps[best] + GAP_TIE_TOL {
            best = j;
        }
    }
    Ok(best + 1)
}

/// Span of the `k` eigenvectors with smallest eigenvalues.
pub fn low_frequency_subspace(spec: &LaplacianSpectrum, k: usize) -> Result<GrassmannPoint> {
    let n = spec.eigenvalues.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k must lie in 1..={n}, got {k}")));
    }
    GrassmannPoint::new(spec.eigenvectors.columns(0, k).into_owned())
}

/// Common subspace dimension for two groups: the gap-selected `k` of each
/// group's mean-adjacency Laplacian, taking the larger.
pub fn group_k(group_a: &[WeightedGraph], group_b: &[WeightedGraph], j_max: usize) -> Result<usize> {
    let ka = gap_spectrum_select_k(&laplacian_spectrum(&WeightedGraph::mean(group_a)?)?, j_max)?;
    let kb = gap_spectrum_select_k(&laplacian_spectrum(&WeightedGraph::mean(group_b)?)?, j_max)?;
    Ok(ka.max(kb))
}

/// `D^{1/2} 1`, normalized; the zero-eigenvalue direction of a graph without isolated nodes.
pub fn stationary_vector(g: &WeightedGraph) -> DVector<f64> {
    let v = DVector::from_iterator(g.n(), g.degrees().into_iter().map(f64::sqrt));
    let norm = v.norm();
    if norm > 0.0 { v / norm } else { v }
}
