//! Riemannian geometry of correlation matrices and Grassmann subspaces,
//! with the statistics and learning pipelines that sit on top of it.

pub mod cli;
pub mod cohort;
pub mod corr;
pub mod error;
pub mod graph;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod ml;
pub mod stats;
pub mod synth;

pub use cohort::{CohortDataset, Label, Subject};
pub use corr::{CorrelationMatrix, FlatCoords, HollowSymmetricMatrix, Metric};
pub use error::{Error, Result};
pub use grassmann::GrassmannPoint;
