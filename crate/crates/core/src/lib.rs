//! Sparse Gaussian graphical model inference with a latent block structure.
//!
//! The library estimates sparse precision (inverse covariance) matrices whose
//! l1 penalty is modulated by an unobserved clustering of the variables. The
//! pieces:
//!
//! - [`mat`], [`dataset`]: dense symmetric-matrix toolkit and observations.
//! - [`lasso`]: weighted-l1 coordinate-descent kernel.
//! - [`glasso`]: penalized covariance selection with an entrywise penalty
//!   matrix (block coordinate descent over columns).
//! - [`em`]: variational E-step, spectral initialization and the alternating
//!   EM orchestration.
//! - [`penalty`]: Student-t based penalty calibration.
//! - [`neighborhood`]: per-node lasso regressions (AND/OR symmetrized) and the
//!   penalized pseudo-log-likelihood.
//! - [`netsim`]: synthetic structured-network generator.
//! - [`eval`]: precision/recall benchmarking and connectivity-containment
//!   checks.

pub mod dataset;
pub mod em;
pub mod error;
pub mod eval;
pub mod glasso;
pub mod io;
pub mod lasso;
pub mod mat;
pub mod neighborhood;
pub mod netsim;
pub mod penalty;
pub mod rng;

pub use dataset::{empirical_covariance, Dataset};
pub use error::{Error, Result};
pub use mat::SymmetricMatrix;
