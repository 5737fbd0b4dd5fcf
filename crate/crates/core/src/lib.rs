//! Demixing two structured signals from a randomized mixture
//! `b = A·G(u*) + √m·H(v*) + η`, where `G` and `H` are Lipschitz generators
//! and `A` has independent isotropic subgaussian rows.
//!
//! * [`ensemble`]: seeded subgaussian matrices.
//! * [`gennet`]: dense feedforward generators with VJPs and Lipschitz bounds.
//! * [`mixing`]: the operator `[A √m·I]` and the MSE objective.
//! * [`solver`]: Adam in latent space, restarts, one- and two-matrix variants.
//! * [`conclab`]: nets, Gaussian width, deviation, S-REC and phase experiments.
//! * [`io`]: weight, vector and parity-fixture files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conclab;
pub mod ensemble;
pub mod error;
pub mod gennet;
pub mod io;
pub mod linalg;
pub mod mixing;
pub mod solver;

pub use ensemble::{sample_matrix, EnsembleKind, EnsembleSpec, RngSeed};
pub use error::{DemixError, Result};
pub use gennet::{Activation, GeneratorNet, LatentPoint, Layer, MergeMode};
pub use linalg::DenseMatrix;
pub use mixing::{DemixProblem, GroundTruth, MixingOperator};
pub use solver::{solve, InitScheme, RecoveryResult, SolverConfig};
