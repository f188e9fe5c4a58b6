use nalgebra::{DMatrix, DVector};

use super::ExprMatrix;
use crate::error::GeomError;
use crate::jets::Point;
use crate::riemann::{MetricField, MetricSource, PointGeometry};

/// Classes of almost contact metric structures told apart by `(∇_X φ)Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactClass {
    /// `(∇_X φ)Y = −g(X,Y)ξ + η(Y)X`.
    Sasakian,
    /// `(∇_X φ)Y = g(φX,Y)ξ − η(Y)φX`.
    Kenmotsu,
    /// `∇φ = 0`.
    Cosymplectic,
    /// `(∇_X φ)Y + (∇_Y φ)X = 0`.
    NearlyCosymplectic,
}

impl ContactClass {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sasakian" => Self::Sasakian,
            "kenmotsu" => Self::Kenmotsu,
            "cosymplectic" => Self::Cosymplectic,
            "nearly_cosymplectic" => Self::NearlyCosymplectic,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sasakian => "sasakian",
            Self::Kenmotsu => "kenmotsu",
            Self::Cosymplectic => "cosymplectic",
            Self::NearlyCosymplectic => "nearly_cosymplectic",
        }
    }
}

/// An almost contact metric structure `(φ, ξ, η, g)` on an odd-dimensional chart.
#[derive(Debug, Clone)]
pub struct ContactStructure {
    pub metric: MetricField,
    pub phi: ExprMatrix,
    /// Column vector.
    pub xi: ExprMatrix,
    /// Row vector.
    pub eta: ExprMatrix,
}

/// Residuals of the almost contact metric identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmostContactResiduals {
    /// `φ² + I − ξ⊗η`.
    pub phi_square: f64,
    /// `φξ`.
    pub phi_xi: f64,
    /// `η∘φ`.
    pub eta_phi: f64,
    /// `η(ξ) − 1`.
    pub eta_xi: f64,
    /// `η − g(·, ξ)`.
    pub eta_metric: f64,
    /// `g(φ·, φ·) − g + η⊗η`.
    pub compatibility: f64,
}

impl AlmostContactResiduals {
    pub fn max(&self) -> f64 {
        [self.phi_square, self.phi_xi, self.eta_phi, self.eta_xi, self.eta_metric, self.compatibility]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl ContactStructure {
    pub fn new(metric: MetricField, phi: ExprMatrix, xi: ExprMatrix, eta: ExprMatrix) -> Result<Self, GeomError> {
        let m = metric.dim();
        if m % 2 == 0 {
            return Err(GeomError::Config(format!("almost contact structure needs odd dimension, got {m}")));
        }
        for (what, shape, want) in [("phi", phi.shape(), (m, m)), ("xi", xi.shape(), (m, 1)), ("eta", eta.shape(), (1, m))] {
            if shape != want {
                return Err(GeomError::Config(format!("{what} has shape {shape:?}, expected {want:?}")));
            }
        }
        Ok(Self { metric, phi, xi, eta })
    }

    /// The standard Sasakian structure on `R^5` with coordinates
    /// `(x1, x2, y1, y2, z)`: `η = ½(dz − y1 dx1 − y2 dx2)`, `ξ = 2∂z`,
    /// `g = η⊗η + ¼ Σ(dx_i² + dy_i²)`, `φ∂x_i = ∂y_i`, `φ∂y_i = −∂x_i − y_i ∂z`.
    /// Its φ-sectional curvature is −3.
    pub fn standard_sasakian() -> Self {
        let g = vec![
            vec!["x3^2/4+1/4", "x3*x4/4", "0", "0", "-x3/4"],
            vec!["x3*x4/4", "x4^2/4+1/4", "0", "0", "-x4/4"],
            vec!["0", "0", "1/4", "0", "0"],
            vec!["0", "0", "0", "1/4", "0"],
            vec!["-x3/4", "-x4/4", "0", "0", "1/4"],
        ];
        let phi = vec![
            vec!["0", "0", "-1", "0", "0"],
            vec!["0", "0", "0", "-1", "0"],
            vec!["1", "0", "0", "0", "0"],
            vec!["0", "1", "0", "0", "0"],
            vec!["0", "0", "-x3", "-x4", "0"],
        ];
        let metric = MetricField::parse(&g, vec![]).expect("standard metric parses");
        let phi = ExprMatrix::parse(&phi, 5, vec![]).expect("standard phi parses");
        let xi = ExprMatrix::parse_column(&["0", "0", "0", "0", "2"], 5, vec![]).expect("standard xi parses");
        let eta = ExprMatrix::parse(&[vec!["-x3/2", "-x4/2", "0", "0", "1/2"]], 5, vec![]).expect("standard eta parses");
        Self::new(metric, phi, xi, eta).expect("standard structure is well formed")
    }

    pub fn at(&self, x: &Point) -> Result<ContactAt, GeomError> {
        let geo = PointGeometry::at(&self.metric, x)?;
        let (phi, dphi) = self.phi.eval(x)?;
        let (xi, _) = self.xi.eval(x)?;
        let (eta, deta) = self.eta.eval(x)?;
        Ok(ContactAt {
            geo,
            phi,
            dphi,
            xi: xi.column(0).into_owned(),
            eta: eta.row(0).transpose(),
            deta: deta.iter().map(|d| d.row(0).transpose()).collect(),
        })
    }
}

/// A contact structure evaluated at one point, with first derivatives.
#[derive(Debug, Clone)]
pub struct ContactAt {
    pub geo: PointGeometry,
    pub phi: DMatrix<f64>,
    /// `∂_k φ` for each chart coordinate.
    pub dphi: Vec<DMatrix<f64>>,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
    /// `∂_k η` for each chart coordinate.
    pub deta: Vec<DVector<f64>>,
}

impl ContactAt {
    fn dim(&self) -> usize {
        self.phi.nrows()
    }

    fn norm(&self, v: &DVector<f64>) -> f64 {
        self.geo.inner(v, v).max(0.0).sqrt()
    }

    pub fn almost_contact_residuals(&self) -> AlmostContactResiduals {
        let m = self.dim();
        let g = self.geo.metric();
        let (phi, xi, eta) = (&self.phi, &self.xi, &self.eta);
        AlmostContactResiduals {
            phi_square: (phi * phi + DMatrix::identity(m, m) - xi * eta.transpose()).abs().max(),
            phi_xi: (phi * xi).abs().max(),
            eta_phi: (eta.transpose() * phi).abs().max(),
            eta_xi: (eta.dot(xi) - 1.0).abs(),
            eta_metric: (eta - g * xi).abs().max(),
            compatibility: (phi.transpose() * g * phi - g + eta * eta.transpose()).abs().max(),
        }
    }

    /// `∇_k φ` as a matrix: `∂_k φ^i_j + Γ^i_kl φ^l_j − Γ^l_kj φ^i_l`.
    pub fn nabla_phi(&self, k: usize) -> DMatrix<f64> {
        let m = self.dim();
        let gam = DMatrix::from_fn(m, m, |i, l| self.geo.christoffel(i, k, l));
        &self.dphi[k] + &gam * &self.phi - &self.phi * &gam
    }

    /// `(∇_X φ)Y`.
    pub fn nabla_phi_apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for k in 0..self.dim() {
            if x[k] != 0.0 {
                out += self.nabla_phi(k) * y * x[k];
            }
        }
        out
    }

    /// Norm of `(∇_X φ)Y` minus the class's prescribed value.
    pub fn class_residual(&self, class: ContactClass, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let lhs = self.nabla_phi_apply(x, y);
        let diff = match class {
            ContactClass::Sasakian => lhs + &self.xi * self.geo.inner(x, y) - x * self.eta.dot(y),
            ContactClass::Kenmotsu => {
                let phi_x = &self.phi * x;
                lhs - &self.xi * self.geo.inner(&phi_x, y) + phi_x * self.eta.dot(y)
            }
            ContactClass::Cosymplectic => lhs,
            ContactClass::NearlyCosymplectic => lhs + self.nabla_phi_apply(y, x),
        };
        self.norm(&diff)
    }

    /// Half-normalised exterior derivative
    /// `dη(X,Y) = ½(Xη(Y) − Yη(X) − η([X,Y]))` on constant-coefficient fields,
    /// the convention under which `Φ = dη` is the contact metric condition and
    /// `[φ,φ] + 2dη⊗ξ = 0` is normality.
    pub fn d_eta(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let mut s = 0.0;
        for k in 0..self.dim() {
            s += x[k] * self.deta[k].dot(y) - y[k] * self.deta[k].dot(x);
        }
        0.5 * s
    }

    /// `∂_V (φ U)` for constant `U`: `Σ_k V^k (∂_k φ) U`.
    fn d_phi_along(&self, v: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for k in 0..self.dim() {
            if v[k] != 0.0 {
                out += &self.dphi[k] * u * v[k];
            }
        }
        out
    }

    /// `[φ,φ](X,Y) = [φX,φY] + φ²[X,Y] − φ[X,φY] − φ[φX,Y]` on
    /// constant-coefficient fields `X`, `Y` (so `[X,Y] = 0`).
    pub fn nijenhuis(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let (phi_x, phi_y) = (&self.phi * x, &self.phi * y);
        let bracket_phi = self.d_phi_along(&phi_x, y) - self.d_phi_along(&phi_y, x);
        let bracket_x_phi_y = self.d_phi_along(x, y);
        let bracket_phi_x_y = -self.d_phi_along(y, x);
        bracket_phi - &self.phi * bracket_x_phi_y - &self.phi * bracket_phi_x_y
    }

    /// Norm of `[φ,φ](X,Y) + 2dη(X,Y)ξ`.
    pub fn normality_residual(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let v = self.nijenhuis(x, y) + &self.xi * (2.0 * self.d_eta(x, y));
        self.norm(&v)
    }

    /// `|Φ(X,Y) − dη(X,Y)|` with `Φ(X,Y) = g(φX, Y)`.
    pub fn contact_metric_residual(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.geo.inner(&(&self.phi * x), y) - self.d_eta(x, y)).abs()
    }

    /// Maximum of `residual` over all pairs of coordinate vectors. Every
    /// residual here is bilinear in `(X, Y)`, so this bounds it on all
    /// unit-coefficient pairs up to a dimension factor.
    pub fn max_over_basis(&self, residual: impl Fn(&Self, &DVector<f64>, &DVector<f64>) -> f64) -> f64 {
        let m = self.dim();
        let e = |i: usize| {
            let mut v = DVector::zeros(m);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                worst = worst.max(residual(self, &e(i), &e(j)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn standard_sasakian_structure() {
        let s = ContactStructure::standard_sasakian();
        for x in [[0.0; 5], [0.3, -1.2, 0.7, 2.0, 5.0], [-2.0, 0.1, -1.5, 0.4, -0.3]] {
            let at = s.at(&pt(&x)).unwrap();
            assert!(at.almost_contact_residuals().max() < 1e-14);
            assert!(at.max_over_basis(|a, u, v| a.class_residual(ContactClass::Sasakian, u, v)) < 1e-13);
            assert!(at.max_over_basis(ContactAt::normality_residual) < 1e-13);
            assert!(at.max_over_basis(ContactAt::contact_metric_residual) < 1e-14);
            assert!(at.max_over_basis(|a, u, v| a.class_residual(ContactClass::Cosymplectic, u, v)) > 0.1);
            assert!(at.max_over_basis(|a, u, v| a.class_residual(ContactClass::Kenmotsu, u, v)) > 0.1);
        }
    }

    #[test]
    fn unnormalised_d_eta_breaks_normality() {
        let at = ContactStructure::standard_sasakian().at(&pt(&[0.3, 0.2, -0.5, 1.0, 0.0])).unwrap();
        let full = at.max_over_basis(|a, u, v| a.norm(&(a.nijenhuis(u, v) + &a.xi * (4.0 * a.d_eta(u, v)))));
        assert!(full > 0.25, "{full}");
        let half_phi = at.max_over_basis(|a, u, v| (a.geo.inner(&(&a.phi * u), v) - 2.0 * a.d_eta(u, v)).abs());
        assert!(half_phi > 0.1, "{half_phi}");
    }

    #[test]
    fn degenerate_structure_fails() {
        let zero = |r, c| ExprMatrix::constant(&DMatrix::zeros(r, c));
        let s = ContactStructure::new(MetricField::flat(3), zero(3, 3), zero(3, 1), zero(1, 3)).unwrap();
        let r = s.at(&pt(&[0.0, 0.0, 0.0])).unwrap().almost_contact_residuals();
        assert_eq!(r.eta_xi, 1.0);
    }

    #[test]
    fn perturbed_phi_is_reported() {
        let mut s = ContactStructure::standard_sasakian();
        let mut rows: Vec<Vec<String>> = (0..5).map(|i| (0..5).map(|j| s.phi.entry(i, j).to_string()).collect()).collect();
        rows[0][2] = "(-1.0) + 0.001".into();
        s.phi = ExprMatrix::parse(&rows, 5, vec![]).unwrap();
        let r = s.at(&pt(&[0.2, 0.1, 0.3, 0.4, 0.5])).unwrap().almost_contact_residuals().max();
        assert!(r > 5e-4 && r < 5e-3, "{r}");
    }

    #[test]
    fn flat_trivial_structure_is_cosymplectic() {
        // R³ = C × R with φ the rotation on the first two coordinates.
        let phi = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let xi = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
        let s = ContactStructure::new(
            MetricField::flat(3),
            ExprMatrix::constant(&phi),
            ExprMatrix::constant(&xi),
            ExprMatrix::constant(&xi.transpose()),
        )
        .unwrap();
        let at = s.at(&pt(&[0.5, 0.5, 0.5])).unwrap();
        assert_eq!(at.almost_contact_residuals().max(), 0.0);
        assert_eq!(at.max_over_basis(|a, u, v| a.class_residual(ContactClass::Cosymplectic, u, v)), 0.0);
        assert_eq!(at.max_over_basis(ContactAt::normality_residual), 0.0);
    }

    #[test]
    fn constant_phi_with_non_closed_eta_is_not_normal() {
        let phi = vec![
            vec!["0", "-1", "0"],
            vec!["1", "0", "0"],
            vec!["0", "0", "0"],
        ];
        let mut s = ContactStructure::standard_sasakian();
        s.metric = MetricField::flat(3);
        s.phi = ExprMatrix::parse(&phi, 3, vec![]).unwrap();
        s.xi = ExprMatrix::parse_column(&["0", "0", "1"], 3, vec![]).unwrap();
        // dη ≠ 0 on the (x1, x2) plane while [φ,φ] = 0.
        s.eta = ExprMatrix::parse(&[vec!["x2", "0", "1"]], 3, vec![]).unwrap();
        let at = s.at(&pt(&[0.1, 0.2, 0.3])).unwrap();
        assert!(at.max_over_basis(ContactAt::normality_residual) > 0.1);
    }
}
