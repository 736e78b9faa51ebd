//! Ground-state learning for the 1-D periodic transverse-field Ising chain.
//!
//! The crate provides, bottom to top:
//!
//! - [`spin`]: configuration enumeration, magnetization, and the `S_z`
//!   partitions that route configurations to experts;
//! - [`hamiltonian`]: the sparse Ising operator and its matvec;
//! - [`eigen`]: Lanczos and dense-Jacobi ground-state solvers (the label
//!   oracle and its independent cross-check);
//! - [`dataset`]: field-parameter grids, labeled/unlabeled splits, and
//!   JSON-lines persistence;
//! - [`nn`]: a deterministic double-precision MLP engine with SGD/momentum,
//!   plateau decay, and early stopping;
//! - [`loss`]: the cosine and variational (Rayleigh-quotient) losses with
//!   exact gradients;
//! - [`model`]: the monolithic baseline network and the mixture-of-experts
//!   model with `S_z` gating and output reordering;
//! - [`train`]: the training loop, evaluation, and multi-seed aggregation;
//! - [`ablate`]: canned experiment variants emitting CSV tables;
//! - [`report`]: summary-file regeneration from persisted run artifacts.

// Link the system BLAS that backs ndarray's matrix products.
use blas_src as _;

pub mod ablate;
pub mod dataset;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod loss;
pub mod model;
pub mod nn;
pub mod report;
pub mod spin;
pub mod train;

pub use error::{Error, Result};
