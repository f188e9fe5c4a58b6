//! Truncated multivariate Taylor arithmetic through order three, and a
//! central finite-difference oracle used to cross-check it.
//!
//! Every geometric quantity in this crate is built on [`Jet3`]: the value of a
//! scalar field together with all of its partial derivatives of order one,
//! two and three at a single point. Third derivatives are the minimum needed
//! to get the intrinsic curvature of an induced metric, whose second
//! derivatives involve third derivatives of the immersion.

mod domain;
mod fd;
mod jet;

pub use domain::{DomainBox, Exclusion, Point};
pub use fd::{default_step, fd_partial};
pub use jet::{jet_arith, Jet3, JetOp};

use thiserror::Error;

/// Failures raised by jet construction, jet arithmetic and the difference oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("domain error in `{op}` at value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("finite-difference stencil leaves the domain at {point:?}")]
    StencilOutsideDomain { point: Vec<f64> },
}
