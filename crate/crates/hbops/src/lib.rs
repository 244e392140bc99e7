//! Exact-arithmetic toolkit for norm-preserving extension of operators
//! between finite-dimensional normed spaces.
//!
//! The crate models symmetric convex unit balls as composable expressions,
//! computes their polars, faces and the support-set invariants f(X) and
//! d(x), decides whether an operator between polytopal spaces extends to
//! every superspace without norm increase (an exact LP), and runs the
//! constructive rank-k existence proof, emitting machine-checkable
//! extension certificates.

pub mod exactnum;
pub mod hahn_banach;
pub mod bodies;
pub mod lp;
pub mod operators;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix")]
    Singular,
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("unsupported point: {0}")]
    UnsupportedPoint(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
