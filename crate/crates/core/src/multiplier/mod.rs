//! Multipliers as double centralizers, and the diagonal subalgebra.

pub mod centralizer;
pub mod diagonal;
pub mod merge;

use thiserror::Error;

use crate::matrices::MatrixError;
use crate::weights::WeightError;

pub use centralizer::{
    centralizer_ops, essential_ideal_witness, law_residual, make_centralizer, pair_residual, pairs_agree,
    reconstruct, reconstruct_adjoint, unit_basis, CentralizerOp, CentralizerPair,
};
pub use diagonal::{diag_embed, diag_invert, diag_project, project, DiagonalElement, Embedding, Inversion, Projection};
pub use merge::{merge_projection, merge_upper_lower, q_algebra_probe, QProbe};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultiplierError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("reconstruction vector must have unit l2 norm, got {norm}")]
    NotUnit { norm: f64 },
    #[error("expected a single band(0) envelope term without patches")]
    NotDiagonal,
    #[error("indices start at 1")]
    ZeroIndex,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}
