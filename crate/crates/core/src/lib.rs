//! Latent complete row space recovery (LCRSR) for multi-view data.
//!
//! Every view `X_v` (`d_v x n`) of the same `n` samples is modelled as a
//! linear image of one latent representation plus sparse gross errors. The
//! row space of the latent representation is shared by all views; this crate
//! recovers an orthonormal basis `V̂` of it together with per-view sparse error
//! matrices, and clusters samples by running K-Means on the rows of `V̂`.
//!
//! Modules:
//!
//! * [`linalg`]: truncated symmetric eigendecomposition, thin SVD, shrinkage.
//! * [`dataset`] and [`io`]: multi-view datasets, manifests, matrix files.
//! * [`solver`]: the alternating minimization.
//! * [`clustering`] and [`metrics`]: K-Means on `V̂` and agreement scores.
//! * [`synthetic`]: the generative model and the recovery phase experiment.
//! * [`bgsub`]: multi-camera background subtraction on PGM frame sequences.
//! * [`cli`]: the commands behind the `lcrsr` binary.

pub mod error;
pub mod io;
pub mod linalg;
pub mod dataset;
pub mod solver;
pub mod clustering;
pub mod metrics;
pub mod synthetic;
pub mod bgsub;
pub mod cli;

pub use dataset::{load_dataset, save_dataset, MultiViewDataset};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, OrthonormalBasis};
pub use solver::{solve, MuPolicy, SolverConfig, SolverResult};
