use thiserror::Error;

use crate::exprdsl::{EvalError, ParseError};
use crate::jets::JetError;

/// Failures of the pointwise geometric computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("metric is not positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },
    #[error("metric entries ({i},{j}) and ({j},{i}) differ at {point:?}")]
    AsymmetricMetric { i: usize, j: usize, point: Vec<f64> },
    #[error("vectors span a degenerate plane (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },
    #[error("vector {index} is dependent on the preceding ones")]
    DependentVectors { index: usize },
    #[error("warping function must be positive, got {value} at {point:?}")]
    InvalidWarping { value: f64, point: Vec<f64> },
    #[error("immersion differential is rank deficient at {point:?} (smallest singular value {sigma:e})")]
    DegenerateImmersion { sigma: f64, point: Vec<f64> },
    #[error("vector is not normal (tangential part {tangential:e})")]
    InvalidNormal { tangential: f64 },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Config(String),
}
