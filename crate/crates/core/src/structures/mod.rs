//! Ambient structures: almost complex and almost contact metric structures
//! given by expression-valued tensors, and closed-form space-form curvature
//! models.
//!
//! A `(1,1)` tensor is stored as the matrix acting on column vectors, so
//! entry `(i, j)` is the `∂i` component of the image of `∂j`.

mod complex;
mod contact;
mod models;

pub use complex::ComplexStructure;
pub use contact::{ContactAt, ContactClass, ContactStructure};
pub use models::{ModelTensors, SpaceFormKind, SpaceFormModel};

use nalgebra::DMatrix;

use crate::error::GeomError;
use crate::exprdsl::{eval_expr, parse, Expr};
use crate::jets::Point;

/// A matrix of expressions over a chart of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
    params: Vec<f64>,
}

impl ExprMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>, params: Vec<f64>) -> Result<Self, GeomError> {
        if entries.len() != rows * cols {
            return Err(GeomError::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        Ok(Self { rows, cols, entries, params })
    }

    /// Parses a row-major matrix of expressions over `x1..x{dim}`.
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], dim: usize, params: Vec<f64>) -> Result<Self, GeomError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(GeomError::DimensionMismatch { expected: c, found: bad.len() });
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| parse(s.as_ref(), dim, params.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(r, c, entries, params)
    }

    /// A column vector of expressions.
    pub fn parse_column<S: AsRef<str>>(items: &[S], dim: usize, params: Vec<f64>) -> Result<Self, GeomError> {
        let rows: Vec<Vec<&str>> = items.iter().map(|s| vec![s.as_ref()]).collect();
        Self::parse(&rows, dim, params)
    }

    /// A constant matrix.
    pub fn constant(m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| Expr::num(m[(i, j)])).collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries, params: vec![] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }

    /// Value at `x` and the partials `∂_k` for every chart coordinate `k`.
    pub fn eval(&self, x: &Point) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), GeomError> {
        let jets = self.entries.iter().map(|e| eval_expr(e, x, &self.params)).collect::<Result<Vec<_>, _>>()?;
        let at = |i: usize, j: usize| &jets[i * self.cols + j];
        let value = DMatrix::from_fn(self.rows, self.cols, |i, j| at(i, j).value());
        let d1 = (0..x.dim()).map(|k| DMatrix::from_fn(self.rows, self.cols, |i, j| at(i, j).d1(k))).collect();
        Ok((value, d1))
    }
}
