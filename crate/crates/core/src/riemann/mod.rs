//! Intrinsic Riemannian geometry of a metric given in a coordinate chart.
//!
//! Curvature convention: the stored component `R[i][j][k][l]` is
//! `g(R(∂i,∂j)∂k, ∂l)` with `R(X,Y) = ∇X∇Y − ∇Y∇X − ∇[X,Y]`, so the
//! sectional curvature of `span(X,Y)` is `R(X,Y,Y,X) / |X∧Y|²` and the round
//! sphere has positive curvature. The Laplacian is the geometer's one,
//! `Δψ = −div grad ψ`, which is non-negative on compact manifolds.

mod field;
mod geometry;

pub use field::{MetricField, MetricJet, MetricSource};
pub use geometry::{OrthoFrame, PointGeometry};
pub(crate) use geometry::{complete_by_pivoting, frame_pair_sum, gram_schmidt, gram_schmidt_skipping, unit};

use nalgebra::DVector;

use crate::error::GeomError;
use crate::exprdsl::Expr;
use crate::jets::Point;

/// `Γ^k_ij` at `x`, indexed `[k][i][j]`.
pub fn christoffel(g: &dyn MetricSource, x: &Point) -> Result<Vec<Vec<Vec<f64>>>, GeomError> {
    let geo = PointGeometry::at(g, x)?;
    let n = geo.dim();
    Ok((0..n).map(|k| (0..n).map(|i| (0..n).map(|j| geo.christoffel(k, i, j)).collect()).collect()).collect())
}

/// Sectional curvature of `span(X, Y)` at `x`.
pub fn sectional(g: &dyn MetricSource, x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64, GeomError> {
    PointGeometry::at(g, x)?.sectional(u, v)
}

/// Scalar curvature `Σ_{i<j} K(e_i ∧ e_j)` at `x`.
pub fn scalar_curvature(g: &dyn MetricSource, x: &Point) -> Result<f64, GeomError> {
    PointGeometry::at(g, x)?.scalar_curvature()
}

/// Gradient of `psi` at `x` in chart components.
pub fn gradient(g: &dyn MetricSource, psi: &Expr, params: &[f64], x: &Point) -> Result<DVector<f64>, GeomError> {
    let geo = PointGeometry::at(g, x)?;
    let jet = crate::exprdsl::eval_expr(psi, x, params)?;
    Ok(geo.gradient(&jet))
}

/// `|grad psi|²` at `x`.
pub fn grad_norm_sq(g: &dyn MetricSource, psi: &Expr, params: &[f64], x: &Point) -> Result<f64, GeomError> {
    let geo = PointGeometry::at(g, x)?;
    let jet = crate::exprdsl::eval_expr(psi, x, params)?;
    Ok(geo.grad_norm_sq(&jet))
}

/// Geometer's Laplacian `Δψ = −g^{ij}(∂_ij ψ − Γ^k_ij ∂_k ψ)` at `x`.
pub fn laplacian(g: &dyn MetricSource, psi: &Expr, params: &[f64], x: &Point) -> Result<f64, GeomError> {
    let geo = PointGeometry::at(g, x)?;
    let jet = crate::exprdsl::eval_expr(psi, x, params)?;
    Ok(geo.laplacian(&jet))
}

/// Orthonormal frame at `x` by Gram–Schmidt over `seeds` (coordinate
/// vectors when `None`).
pub fn orthonormal_frame(
    g: &dyn MetricSource,
    x: &Point,
    seeds: Option<&[DVector<f64>]>,
) -> Result<OrthoFrame, GeomError> {
    PointGeometry::at(g, x)?.orthonormal_frame(seeds)
}
