//! Linear SVM (hinge loss) trained by dual coordinate descent.
//!
//! The bias is learned as the weight of an extra constant feature, so it is
//! regularized together with `w`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cohort::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    pub max_epochs: usize,
    /// Stop when the projected-gradient spread of an epoch falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl SvmOptions {
    pub fn new(c: f64, seed: u64) -> Self {
        SvmOptions {
            c,
            max_epochs: 1000,
            tol: 1e-4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: DVector<f64>,
    pub bias: f64,
    pub epochs: usize,
    pub converged: bool,
}

impl SvmModel {
    /// `wᵀx + b` per row; positive means class `B`.
    pub fn decision(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.weights + DVector::from_element(x.nrows(), self.bias)
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<Label> {
        self.decision(x)
            .iter()
            .map(|&s| if s > 0.0 { Label::B } else { Label::A })
            .collect()
    }
}

pub fn linear_svm_fit(x: &DMatrix<f64>, labels: &[Label], options: &SvmOptions) -> Result<SvmModel> {
    let (m, p) = x.shape();
    if labels.len() != m {
        return Err(Error::dims(m, labels.len()));
    }
    if !(options.c > 0.0) {
        return Err(Error::InvalidInput(format!("C must be positive, got {}", options.c)));
    }
    if m == 0 {
        return Err(Error::EmptyInput("training samples"));
    }
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let rows: Vec<DVector<f64>> = (0..m).map(|i| x.row(i).transpose()).collect();
    let q_diag: Vec<f64> = rows.iter().map(|r| r.norm_squared() + 1.0).collect();

    let mut w = DVector::zeros(p);
    let mut b = 0.0;
    let mut alpha = vec![0.0; m];
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut converged = false;
    let mut epochs = 0;

    while epochs < options.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let g = y[i] * (w.dot(&rows[i]) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= options.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, options.c);
                let delta = (alpha[i] - old) * y[i];
                w.axpy(delta, &rows[i], 1.0);
                b += delta;
            }
        }
        if pg_max - pg_min < options.tol {
            converged = true;
            break;
        }
    }
    Ok(SvmModel {
        weights: w,
        bias: b,
        epochs,
        converged,
    })
}
