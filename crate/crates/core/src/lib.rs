//! Separability analysis for bipartite quantum states in the Bloch representation.
//!
//! The crate takes an `N x M` bipartite density matrix, extracts its local Bloch
//! vectors and correlation matrix `T`, and runs a pipeline of entanglement
//! criteria: local-rank screening, partial transposition, Ky Fan norm bounds,
//! lower bounds on the squared Bloch norms of decomposition members, and
//! positivity of local symmetry maps. When the criteria permit, it constructs an
//! explicit separable decomposition `rho = sum_i p_i rho_i^A (x) rho_i^B` by
//! factoring `T` into two Bloch-vector factor matrices built from an orthogonal
//! sign matrix, and validates the construction by reconstruction.
//!
//! Modules follow the pipeline order:
//!
//! - [`basis`] — SU(N) generator bases and matrix reshaping (vectorize, wrap, realign)
//! - [`bloch`] — density matrix <-> Bloch form conversions, partial traces
//! - [`normal_form`] — local-rank screening, support reduction, filtering to
//!   maximally mixed marginals
//! - [`criteria`] — entanglement tests and numeric bound oracles
//! - [`decompose`] — correlation-matrix factorization and explicit separable
//!   decompositions
//! - [`states`] — constructors for the example state families and seeded random
//!   state generators
//!
//! With the default `parallel` feature, bound-oracle restarts and decomposition
//! search starts run on a rayon pool with a deterministic best-of reduction;
//! results are identical to the sequential fallback for a fixed seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub mod basis;
pub mod bloch;
pub mod criteria;
pub mod decompose;
pub mod linalg;
pub mod normal_form;
pub mod optim;
pub mod states;

/// Dense complex matrix used for operators and states.
pub type CMat = DMatrix<Complex64>;
/// Dense complex vector (vectorized matrices, pure states).
pub type CVec = DVector<Complex64>;
/// Dense real matrix (correlation matrices, orthogonal maps).
pub type RMat = DMatrix<f64>;
/// Dense real vector (Bloch vectors, singular values).
pub type RVec = DVector<f64>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be >= 2")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.6e})")]
    NotPositive(f64),

    #[error("trace is {0:.12} but must be 1")]
    InvalidTrace(f64),

    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    NotOrthogonal(f64),

    #[error("directions are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("reduced state is rank deficient (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("state has correlation leak {0:.3e} outside the local support; not reducible")]
    InvalidReduction(f64),

    #[error("filtering did not converge in {iterations} iterations (|a| = {a_norm:.3e}, |b| = {b_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        a_norm: f64,
        b_norm: f64,
    },

    #[error("state is not in normal form (|a| = {0:.3e}, |b| = {1:.3e})")]
    NotNormalForm(f64, f64),

    #[error("correlation rank {0} exceeds the supported decomposition rank 3")]
    UnsupportedRank(usize),

    #[error("term count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("scale vector mismatch: {0}")]
    BadScales(String),

    #[error("subspace bounds do not match the correlation subspaces: {0}")]
    BoundMismatch(String),

    #[error("decomposition search failed; best local min eigenvalue {best_score:.6e}")]
    SearchFailed { best_score: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub use bloch::{BlochForm, DensityMatrix, HermitianUnitTrace};
pub use criteria::{SubspaceBounds, Verdict};
pub use decompose::{Factorization, SeparableDecomposition};
pub use normal_form::LocalRankReport;
