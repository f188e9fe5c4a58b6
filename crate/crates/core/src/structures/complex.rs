use nalgebra::DMatrix;

use super::ExprMatrix;
use crate::error::GeomError;
use crate::jets::Point;
use crate::riemann::{MetricField, PointGeometry};

/// An almost Hermitian structure `(g, J)` on an even-dimensional chart.
#[derive(Debug, Clone)]
pub struct ComplexStructure {
    pub metric: MetricField,
    pub j: ExprMatrix,
}

/// Residuals of the almost Hermitian identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResiduals {
    /// `max |J² + I|`.
    pub square: f64,
    /// `max |Jᵀ g J − g|`.
    pub compatibility: f64,
    /// `max |∇J|`, zero exactly for Kähler structures.
    pub parallel: f64,
}

impl ComplexResiduals {
    pub fn max(&self) -> f64 {
        self.square.max(self.compatibility).max(self.parallel)
    }
}

impl ComplexStructure {
    pub fn new(metric: MetricField, j: ExprMatrix) -> Result<Self, GeomError> {
        let m = crate::riemann::MetricSource::dim(&metric);
        if m % 2 != 0 {
            return Err(GeomError::Config(format!("almost complex structure needs even dimension, got {m}")));
        }
        if j.shape() != (m, m) {
            return Err(GeomError::DimensionMismatch { expected: m, found: j.shape().0 });
        }
        Ok(Self { metric, j })
    }

    /// The flat `C^k ≅ R^{2k}` with coordinates `(x1, y1, x2, y2, ...)` and
    /// `J∂x = ∂y`, `J∂y = −∂x`.
    pub fn flat(k: usize) -> Self {
        let m = 2 * k;
        let mut j = DMatrix::zeros(m, m);
        for a in 0..k {
            j[(2 * a + 1, 2 * a)] = 1.0;
            j[(2 * a, 2 * a + 1)] = -1.0;
        }
        Self { metric: MetricField::flat(m), j: ExprMatrix::constant(&j) }
    }

    pub fn j_at(&self, x: &Point) -> Result<DMatrix<f64>, GeomError> {
        Ok(self.j.eval(x)?.0)
    }

    pub fn residuals(&self, x: &Point) -> Result<ComplexResiduals, GeomError> {
        let geo = PointGeometry::at(&self.metric, x)?;
        let (j, dj) = self.j.eval(x)?;
        let m = j.nrows();
        let g = geo.metric();
        let square = (&j * &j + DMatrix::identity(m, m)).abs().max();
        let compatibility = (j.transpose() * g * &j - g).abs().max();
        let mut parallel: f64 = 0.0;
        for (k, djk) in dj.iter().enumerate() {
            // (∇_k J)^i_j = ∂_k J^i_j + Γ^i_kl J^l_j − Γ^l_kj J^i_l
            let gam = DMatrix::from_fn(m, m, |i, l| geo.christoffel(i, k, l));
            let nabla = djk + &gam * &j - &j * &gam;
            parallel = parallel.max(nabla.abs().max());
        }
        Ok(ComplexResiduals { square, compatibility, parallel })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_structure_is_kaehler() {
        let s = ComplexStructure::flat(2);
        let r = s.residuals(&Point::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn non_parallel_structure_detected() {
        // The standard J conjugated by a rotation of the (x2, x3) plane through angle x1.
        let rows = vec![
            vec!["0", "-cos(x1)", "-sin(x1)", "0"],
            vec!["cos(x1)", "0", "0", "sin(x1)"],
            vec!["sin(x1)", "0", "0", "-cos(x1)"],
            vec!["0", "-sin(x1)", "cos(x1)", "0"],
        ];
        let j = ExprMatrix::parse(&rows, 4, vec![]).unwrap();
        let s = ComplexStructure::new(MetricField::flat(4), j).unwrap();
        let r = s.residuals(&Point::new(vec![0.4, 0.0, 1.0, 2.0]).unwrap()).unwrap();
        assert!(r.square < 1e-15 && r.compatibility < 1e-15);
        assert!(r.parallel > 0.5);
    }
}
