//! Matrix completion on graphs.
//!
//! Recovers a low-rank matrix from a sparse set of observed entries while
//! asking rows and columns to vary smoothly over given row and column
//! graphs. The crate covers the whole experimental pipeline:
//!
//! * [`graphs`]: weighted graphs, Laplacians, k-NN and ε-neighborhood builders
//! * [`solver`]: the ADMM solver (SVT prox plus matrix-free CG)
//! * [`synthgen`]: synthetic community-structured rating data
//! * [`graphbuild`]: graphs from rating blocks with missing values
//! * [`eval`]: splits, cross-validation, and observation sweeps
//! * [`io`]: dense CSV and MovieLens-style ratings files
//!
//! With the default `parallel` feature, independent work (CV cells and
//! folds, pairwise distances) runs on the rayon pool. Results
//! are identical with the feature disabled.

pub mod error;
pub mod eval;
pub mod graphbuild;
pub mod graphs;
pub mod io;
mod par;
pub mod solver;
pub mod synthgen;

pub use error::{Error, Result};
pub use nalgebra::DMatrix;
pub use par::is_parallel;
