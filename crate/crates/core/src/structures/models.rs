use nalgebra::{DMatrix, DVector};

use crate::error::GeomError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceFormKind {
    Complex,
    Sasakian,
    Kenmotsu,
    Cosymplectic,
    GeneralizedComplex,
}

impl SpaceFormKind {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "complex" => Self::Complex,
            "sasakian" => Self::Sasakian,
            "kenmotsu" => Self::Kenmotsu,
            "cosymplectic" => Self::Cosymplectic,
            "generalized_complex" => Self::GeneralizedComplex,
            _ => return None,
        })
    }

    pub fn is_contact(self) -> bool {
        matches!(self, Self::Sasakian | Self::Kenmotsu | Self::Cosymplectic)
    }
}

/// Metric and structure tensors at a point, as needed by the closed-form
/// curvature models. `j` holds `J` for complex kinds and `φ` for contact kinds.
#[derive(Debug, Clone)]
pub struct ModelTensors {
    pub g: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub xi: Option<DVector<f64>>,
    pub eta: Option<DVector<f64>>,
}

impl ModelTensors {
    /// `R^{2k}` with `g = I` and `J e_{2a} = e_{2a+1}`, matching the flat chart
    /// ordering `(x1, y1, x2, y2, ...)`.
    pub fn standard_complex(k: usize) -> Self {
        let m = 2 * k;
        let mut j = DMatrix::zeros(m, m);
        for a in 0..k {
            j[(2 * a + 1, 2 * a)] = 1.0;
            j[(2 * a, 2 * a + 1)] = -1.0;
        }
        Self { g: DMatrix::identity(m, m), j, xi: None, eta: None }
    }

    /// `R^{2l+1}` with `g = I`, `ξ = e_{2l}`, `φ e_i = e_{l+i}`, `φ e_{l+i} = −e_i`.
    pub fn standard_contact(l: usize) -> Self {
        let m = 2 * l + 1;
        let mut phi = DMatrix::zeros(m, m);
        for i in 0..l {
            phi[(l + i, i)] = 1.0;
            phi[(i, l + i)] = -1.0;
        }
        let mut xi = DVector::zeros(m);
        xi[2 * l] = 1.0;
        Self { g: DMatrix::identity(m, m), j: phi, xi: Some(xi.clone()), eta: Some(xi) }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.g * v))
    }
}

/// A closed-form curvature tensor of constant holomorphic or φ-sectional
/// curvature `c`; `gamma` is used only by the generalized complex kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceFormModel {
    pub kind: SpaceFormKind,
    pub c: f64,
    pub gamma: f64,
}

impl SpaceFormModel {
    pub fn new(kind: SpaceFormKind, c: f64) -> Self {
        Self { kind, c, gamma: 0.0 }
    }

    pub fn generalized(c: f64, gamma: f64) -> Self {
        Self { kind: SpaceFormKind::GeneralizedComplex, c, gamma }
    }

    /// `R(X,Y,Z,W)`, with the same index convention as the intrinsic
    /// curvature, so `K(X∧Y) = R(X,Y,Y,X)` for orthonormal `X, Y`.
    pub fn curvature(
        &self,
        t: &ModelTensors,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64, GeomError> {
        let g = |u: &DVector<f64>, v: &DVector<f64>| t.inner(u, v);
        let (jx, jy, jz) = (&t.j * x, &t.j * y, &t.j * z);
        let round = g(x, w) * g(y, z) - g(x, z) * g(y, w);
        // g(JX,W)g(JY,Z) − g(JX,Z)g(JY,W) + 2g(X,JY)g(JZ,W)
        let holo = g(&jx, w) * g(&jy, z) - g(&jx, z) * g(&jy, w) + 2.0 * g(x, &jy) * g(&jz, w);
        let c = self.c;
        if !self.kind.is_contact() {
            return Ok(match self.kind {
                SpaceFormKind::Complex => c / 4.0 * (round + holo),
                _ => (c + 3.0 * self.gamma) / 4.0 * round + (c - self.gamma) / 4.0 * holo,
            });
        }
        let (Some(xi), Some(eta)) = (&t.xi, &t.eta) else {
            return Err(GeomError::Config("contact space form needs xi and eta".into()));
        };
        let e = |u: &DVector<f64>| eta.dot(u);
        let xi_w = g(xi, w);
        let eta_part = e(z) * (e(y) * g(x, w) - e(x) * g(y, w)) + (g(y, z) * e(x) - g(x, z) * e(y)) * xi_w;
        // −g(φX,W)g(φY,Z) + g(φX,Z)g(φY,W) + 2g(φX,Y)g(φZ,W)
        let phi_part = -g(&jx, w) * g(&jy, z) + g(&jx, z) * g(&jy, w) + 2.0 * g(&jx, y) * g(&jz, w);
        Ok(match self.kind {
            SpaceFormKind::Sasakian => (c + 3.0) / 4.0 * round - (c - 1.0) / 4.0 * (eta_part + phi_part),
            SpaceFormKind::Kenmotsu => (c - 3.0) / 4.0 * round - (c + 1.0) / 4.0 * (eta_part + phi_part),
            _ => c / 4.0 * (round - eta_part - phi_part),
        })
    }

    pub fn sectional(&self, t: &ModelTensors, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, GeomError> {
        let gram = t.inner(x, x) * t.inner(y, y) - t.inner(x, y).powi(2);
        if !(gram > 1e-12) {
            return Err(GeomError::DegeneratePlane { gram });
        }
        Ok(self.curvature(t, x, y, y, x)? / gram)
    }

    /// Sectional curvature of `span(X, φX)` (or `span(X, JX)`), for `X ⊥ ξ`.
    pub fn phi_sectional(&self, t: &ModelTensors, x: &DVector<f64>) -> Result<f64, GeomError> {
        if let Some(xi) = &t.xi {
            let along = t.inner(x, xi);
            if along.abs() > 1e-8 * t.inner(x, x).sqrt() {
                return Err(GeomError::DegeneratePlane { gram: 0.0 });
            }
        }
        self.sectional(t, x, &(&t.j * x))
    }

    /// Largest violation of the algebraic curvature symmetries over all
    /// quadruples drawn from `vectors`.
    pub fn symmetry_residual(&self, t: &ModelTensors, vectors: &[DVector<f64>]) -> Result<f64, GeomError> {
        let r = |a: usize, b: usize, c: usize, d: usize| self.curvature(t, &vectors[a], &vectors[b], &vectors[c], &vectors[d]);
        let n = vectors.len();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = r(a, b, c, d)?;
                        worst = worst
                            .max((v + r(b, a, c, d)?).abs())
                            .max((v + r(a, b, d, c)?).abs())
                            .max((v - r(c, d, a, b)?).abs())
                            .max((v + r(b, c, a, d)? + r(c, a, b, d)?).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(m: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    }

    #[test]
    fn contact_models_on_special_planes() {
        let t = ModelTensors::standard_contact(2);
        let x = e(5, 0);
        let xi = e(5, 4);
        for (kind, k_xi) in [(SpaceFormKind::Sasakian, 1.0), (SpaceFormKind::Kenmotsu, -1.0), (SpaceFormKind::Cosymplectic, 0.0)] {
            let m = SpaceFormModel::new(kind, 2.5);
            assert!((m.phi_sectional(&t, &x).unwrap() - 2.5).abs() < 1e-14, "{kind:?}");
            assert!((m.sectional(&t, &x, &xi).unwrap() - k_xi).abs() < 1e-14, "{kind:?}");
            assert!(m.phi_sectional(&t, &xi).is_err());
        }
    }

    #[test]
    fn complex_models() {
        let t = ModelTensors::standard_complex(2);
        let m = SpaceFormModel::new(SpaceFormKind::Complex, 3.0);
        assert!((m.phi_sectional(&t, &e(4, 0)).unwrap() - 3.0).abs() < 1e-14);
        // totally real plane
        assert!((m.sectional(&t, &e(4, 0), &e(4, 2)).unwrap() - 0.75).abs() < 1e-14);
        let flat = SpaceFormModel::new(SpaceFormKind::Complex, 0.0);
        assert_eq!(flat.curvature(&t, &e(4, 0), &e(4, 1), &e(4, 1), &e(4, 0)).unwrap(), 0.0);
        let gen = SpaceFormModel::generalized(3.0, 0.0);
        let a = gen.curvature(&t, &e(4, 0), &e(4, 1), &e(4, 3), &e(4, 2)).unwrap();
        let b = m.curvature(&t, &e(4, 0), &e(4, 1), &e(4, 3), &e(4, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_contact_tensors() {
        let t = ModelTensors::standard_complex(2);
        let m = SpaceFormModel::new(SpaceFormKind::Sasakian, 1.0);
        assert!(matches!(m.curvature(&t, &e(4, 0), &e(4, 1), &e(4, 1), &e(4, 0)), Err(GeomError::Config(_))));
    }

    #[test]
    fn symmetries_on_basis() {
        let c = ModelTensors::standard_contact(1);
        let basis: Vec<_> = (0..3).map(|i| e(3, i)).collect();
        for kind in [SpaceFormKind::Sasakian, SpaceFormKind::Kenmotsu, SpaceFormKind::Cosymplectic] {
            assert!(SpaceFormModel::new(kind, -1.7).symmetry_residual(&c, &basis).unwrap() < 1e-14);
        }
        let h = ModelTensors::standard_complex(2);
        let basis: Vec<_> = (0..4).map(|i| e(4, i)).collect();
        assert!(SpaceFormModel::generalized(1.3, 0.4).symmetry_residual(&h, &basis).unwrap() < 1e-14);
    }
}
