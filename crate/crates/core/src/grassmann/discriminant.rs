//! Two-class subspace discriminant: centers on the Grassmannian chosen to
//! maximize between-center separation over within-class dispersion.

use nalgebra::DMatrix;

use super::{
    check_same_shape, dist_sq_with_projector, grassmann_exp, grassmann_log, karcher_mean,
    GrassmannPoint, KARCHER_MAX_ITER, KARCHER_TOL,
};
use crate::cohort::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherOptions {
    /// Added to the within-class dispersion in the denominator.
    pub epsilon: f64,
    /// Initial and maximal geodesic step length (radians, joint over both centers).
    pub step: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Stop once an accepted step improves the ratio by at most this, relatively.
    pub rel_tol: f64,
}

impl Default for FisherOptions {
    fn default() -> Self {
        FisherOptions {
            epsilon: 1e-8,
            step: 0.1,
            max_iter: 500,
            max_halvings: 30,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscriminantModel {
    pub center_a: GrassmannPoint,
    pub center_b: GrassmannPoint,
    pub k: usize,
    pub epsilon: f64,
    /// `J = −D_B/(D_W + ε)` at the start and after each accepted step.
    pub objective_trace: Vec<f64>,
    /// Row norms of the projector difference of the fitted centers.
    pub region_scores: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` was reached or the gradient hit the cut locus.
    pub converged: bool,
}

impl DiscriminantModel {
    pub fn initial_ratio(&self) -> f64 {
        -self.objective_trace[0]
    }

    pub fn final_ratio(&self) -> f64 {
        -self.objective_trace[self.objective_trace.len() - 1]
    }
}

struct Group {
    projectors: Vec<DMatrix<f64>>,
    points: Vec<GrassmannPoint>,
}

impl Group {
    fn new(points: &[GrassmannPoint]) -> Self {
        Group {
            projectors: points.iter().map(GrassmannPoint::projector).collect(),
            points: points.to_vec(),
        }
    }

    fn dispersion(&self, center: &GrassmannPoint) -> f64 {
        self.projectors
            .iter()
            .map(|p| dist_sq_with_projector(p, center.basis()))
            .sum()
    }

    /// `Σ_i Log_C(U_i)`; the gradient of the dispersion is `−2` times this.
    fn log_sum(&self, center: &GrassmannPoint) -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::zeros(center.n(), center.k());
        for p in &self.points {
            acc += grassmann_log(center, p)?;
        }
        Ok(acc)
    }
}

/// `D_B / (D_W + ε)` for the given centers.
pub fn fisher_ratio(
    group_a: &[GrassmannPoint],
    group_b: &[GrassmannPoint],
    center_a: &GrassmannPoint,
    center_b: &GrassmannPoint,
    epsilon: f64,
) -> Result<f64> {
    check_same_shape(center_a, center_b)?;
    let (a, b) = (Group::new(group_a), Group::new(group_b));
    Ok(ratio(&a, &b, center_a, center_b, epsilon))
}

fn ratio(a: &Group, b: &Group, ca: &GrassmannPoint, cb: &GrassmannPoint, eps: f64) -> f64 {
    let between = dist_sq_with_projector(&ca.projector(), cb.basis());
    let within = a.dispersion(ca) + b.dispersion(cb);
    between / (within + eps)
}

/// Fits class centers: Karcher means, then monotone Riemannian gradient
/// ascent of `D_B / (D_W + ε)` with backtracking.
pub fn fisher_fit(
    group_a: &[GrassmannPoint],
    group_b: &[GrassmannPoint],
    options: &FisherOptions,
) -> Result<DiscriminantModel> {
    if group_a.is_empty() {
        return Err(Error::DegenerateGroup { group: "A", size: 0, required: 1 });
    }
    if group_b.is_empty() {
        return Err(Error::DegenerateGroup { group: "B", size: 0, required: 1 });
    }
    for p in group_a.iter().chain(group_b) {
        check_same_shape(&group_a[0], p)?;
    }
    let (a, b) = (Group::new(group_a), Group::new(group_b));
    let eps = options.epsilon;

    let mut ca = karcher_mean(group_a, KARCHER_TOL, KARCHER_MAX_ITER)?;
    let mut cb = karcher_mean(group_b, KARCHER_TOL, KARCHER_MAX_ITER)?;
    let mut current = ratio(&a, &b, &ca, &cb, eps);
    let mut trace = vec![-current];
    let mut step = options.step;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        let Ok((ga, gb)) = ratio_gradient(&a, &b, &ca, &cb, eps) else {
            break;
        };
        let norm = (ga.norm_squared() + gb.norm_squared()).sqrt();
        if !(norm > 0.0) {
            converged = true;
            break;
        }
        let mut trial = step;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let scale = trial / norm;
            let next_a = grassmann_exp(&ca, &(&ga * scale))?;
            let next_b = grassmann_exp(&cb, &(&gb * scale))?;
            let r = ratio(&a, &b, &next_a, &next_b, eps);
            if r > current {
                accepted = Some((next_a, next_b, r));
                break;
            }
            trial *= 0.5;
        }
        let Some((next_a, next_b, r)) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;
        let rel = (r - current) / current.abs().max(f64::MIN_POSITIVE);
        ca = next_a;
        cb = next_b;
        current = r;
        trace.push(-current);
        step = (2.0 * trial).min(options.step);
        if rel <= options.rel_tol {
            converged = true;
            break;
        }
    }

    let region_scores = projector_row_norms(&ca, &cb);
    Ok(DiscriminantModel {
        k: ca.k(),
        center_a: ca,
        center_b: cb,
        epsilon: eps,
        objective_trace: trace,
        region_scores,
        iterations,
        converged,
    })
}

/// Riemannian gradient of the ratio with respect to each center.
fn ratio_gradient(
    a: &Group,
    b: &Group,
    ca: &GrassmannPoint,
    cb: &GrassmannPoint,
    eps: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let between = dist_sq_with_projector(&ca.projector(), cb.basis());
    let denom = a.dispersion(ca) + b.dispersion(cb) + eps;
    // d/dC d²(U, C) = −2 Log_C(U)
    let grad = |c: &GrassmannPoint, other: &GrassmannPoint, g: &Group| -> Result<DMatrix<f64>> {
        let d_between = grassmann_log(c, other)? * -2.0;
        let d_within = g.log_sum(c)? * -2.0;
        let g = (d_between * denom - d_within * between) / (denom * denom);
        // Dividing by a tiny denominator amplifies rounding off the
        // horizontal space; project back.
        let x = c.basis();
        Ok(&g - x * (x.transpose() * &g))
    };
    Ok((grad(ca, cb, a)?, grad(cb, ca, b)?))
}

fn projector_row_norms(ca: &GrassmannPoint, cb: &GrassmannPoint) -> Vec<f64> {
    let diff = ca.projector() - cb.projector();
    diff.row_iter().map(|r| r.norm()).collect()
}

/// Label `A` iff `d²(U, C_A) < d²(U, C_B)`; the score is `d²(U, C_A) − d²(U, C_B)`,
/// so larger scores lean towards `B`.
pub fn classify_nearest_center(model: &DiscriminantModel, u: &GrassmannPoint) -> Result<(Label, f64)> {
    check_same_shape(u, &model.center_a)?;
    let p = u.projector();
    let da = dist_sq_with_projector(&p, model.center_a.basis());
    let db = dist_sq_with_projector(&p, model.center_b.basis());
    let label = if da < db { Label::A } else { Label::B };
    Ok((label, da - db))
}

/// Per-node contribution `‖row_r(P_A − P_B)‖₂` of the fitted centers.
pub fn region_importance(model: &DiscriminantModel) -> Vec<f64> {
    projector_row_norms(&model.center_a, &model.center_b)
}
