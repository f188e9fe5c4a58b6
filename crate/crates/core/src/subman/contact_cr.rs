//! Gates and second-fundamental-form consequences for CR-warped immersions.
//!
//! Leaf frame vectors span `D_1` (`D_T`, plus `ξ` in the contact case, where
//! `ξ` is the first leaf vector); fiber frame vectors span `D_⊥`. The normal
//! frame starts with the normal parts of `J D_⊥` or `φ D_⊥` (`F D_⊥`) and
//! continues with its complement `ν`.

use nalgebra::DVector;

use super::sff::tangential_preimage;
use super::{Immersion, SffData};
use crate::error::GeomError;
use crate::jets::Point;
use crate::warped::block_form_residual;

/// Preconditions that must hold before CR consequences are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrGate {
    /// Normal part of `ξ` (contact ambients only).
    pub xi_tangent: Option<f64>,
    /// Component of `ξ` along the fiber (contact ambients only).
    pub xi_in_leaf: Option<f64>,
    /// Largest non-`D_T` part of `J X` or `φ X` for `X` in `D_T`.
    pub invariant: f64,
    /// Largest tangential part of `J Z` or `φ Z` for `Z` in `D_⊥`.
    pub anti_invariant: f64,
    /// Warped block form of the induced metric.
    pub block_form: f64,
}

impl CrGate {
    pub fn max(&self) -> f64 {
        [self.xi_tangent.unwrap_or(0.0), self.xi_in_leaf.unwrap_or(0.0), self.invariant, self.anti_invariant, self.block_form]
            .into_iter()
            .fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
    }
}

/// Residuals of the contact CR consequences at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrResiduals {
    /// `max ‖h(X, ξ)‖` over the leaf frame, including `h(ξ, ξ)`. On the
    /// fiber `h(Z, ξ)` is the normal part of `−φZ`, which does not vanish.
    pub h_xi: f64,
    /// `max |g(h(X, Y), F Z)|` for `X, Y` in the leaf, `Z` in `D_⊥`.
    pub h_dt_fdperp: f64,
    /// `max |g(h(X, Y), ζ) + g(h(φX, φY), ζ)|` for `X, Y` in the leaf, `ζ` in `ν`.
    pub h_dt_nu: f64,
}

impl CrResiduals {
    pub fn max(&self) -> f64 {
        self.h_xi.max(self.h_dt_fdperp).max(self.h_dt_nu)
    }
}

impl SffData {
    /// Frame indices of `D_T` inside the leaf block.
    pub fn invariant_block(&self) -> std::ops::Range<usize> {
        let leaf = self.leaf();
        let skip = usize::from(self.xi.is_some() && !leaf.is_empty());
        leaf.start + skip..leaf.end
    }

    /// `ξ` as a sub-chart vector (its tangential part), for contact ambients.
    pub fn xi_sub(&self) -> Result<Option<DVector<f64>>, GeomError> {
        let Some(xi) = &self.xi else { return Ok(None) };
        let x = Point::new(self.point.clone())?;
        tangential_preimage(&self.tangent.metric, &self.jacobian, &self.normal.metric, xi, &x).map(Some)
    }

    fn ambient_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.normal.metric * v))
    }

    pub fn cr_gate(&self, im: &Immersion) -> Result<CrGate, GeomError> {
        let (Some(decl), Some(op)) = (&im.warped, &self.structure) else {
            return Err(GeomError::Config("CR gates need warped blocks and an ambient structure".into()));
        };
        let x = Point::new(self.point.clone())?;
        let block_form = block_form_residual(&self.induced_jet, decl, &x)?;
        let (mut xi_tangent, mut xi_in_leaf) = (None, None);
        if let (Some(xi), Some(c)) = (&self.xi, self.xi_sub()?) {
            let normal_part = xi - &self.jacobian * &c;
            xi_tangent = Some(self.ambient_inner(&normal_part, &normal_part).max(0.0).sqrt());
            let along_fiber: f64 = self.fiber().map(|k| self.ambient_inner(xi, &self.pushed[k]).powi(2)).sum();
            xi_in_leaf = Some(along_fiber.sqrt());
        }
        let dt = self.invariant_block();
        let mut invariant: f64 = 0.0;
        for a in dt.clone() {
            let mut v = op * &self.pushed[a];
            for b in dt.clone() {
                let c = self.ambient_inner(&v, &self.pushed[b]);
                v.axpy(-c, &self.pushed[b], 1.0);
            }
            invariant = invariant.max(self.ambient_inner(&v, &v).max(0.0).sqrt());
        }
        let mut anti_invariant: f64 = 0.0;
        for big_a in self.fiber() {
            let v = op * &self.pushed[big_a];
            let tangential: f64 = self.pushed.iter().map(|p| self.ambient_inner(&v, p).powi(2)).sum();
            anti_invariant = anti_invariant.max(tangential.sqrt());
        }
        Ok(CrGate { xi_tangent, xi_in_leaf, invariant, anti_invariant, block_form })
    }

    /// Contact CR consequences; requires a contact ambient and a CR declaration.
    pub fn cr_residuals(&self, im: &Immersion) -> Result<CrResiduals, GeomError> {
        let (true, Some(op), Some(xi_c)) = (im.cr, &self.structure, self.xi_sub()?) else {
            return Err(GeomError::Config("contact CR checks need a contact ambient and a CR declaration".into()));
        };
        let mut h_xi: f64 = 0.0;
        for a in self.leaf() {
            h_xi = h_xi.max(self.h_apply(&self.tangent.vectors[a], &xi_c).norm());
        }
        h_xi = h_xi.max(self.h_apply(&xi_c, &xi_c).norm());

        let dt = self.leaf();
        // F Z for fiber frame vectors, in normal frame components.
        let fz: Vec<DVector<f64>> = self
            .fiber()
            .map(|k| {
                let v = op * &self.pushed[k];
                DVector::from_fn(self.codim(), |r, _| self.ambient_inner(&v, &self.normal.vectors[r]))
            })
            .collect();
        let mut h_dt_fdperp: f64 = 0.0;
        for a in dt.clone() {
            for b in dt.clone() {
                let hab = self.h_frame(a, b);
                for f in &fz {
                    h_dt_fdperp = h_dt_fdperp.max(hab.dot(f).abs());
                }
            }
        }

        let x = Point::new(self.point.clone())?;
        let phi_sub: Vec<DVector<f64>> = dt
            .clone()
            .map(|a| tangential_preimage(&self.tangent.metric, &self.jacobian, &self.normal.metric, &(op * &self.pushed[a]), &x))
            .collect::<Result<_, _>>()?;
        let mut h_dt_nu: f64 = 0.0;
        for (ia, a) in dt.clone().enumerate() {
            for (ib, b) in dt.clone().enumerate() {
                let direct = self.h_frame(a, b);
                let turned = self.h_apply(&phi_sub[ia], &phi_sub[ib]);
                for r in self.fiber_image_count..self.codim() {
                    h_dt_nu = h_dt_nu.max((direct[r] + turned[r]).abs());
                }
            }
        }
        Ok(CrResiduals { h_xi, h_dt_fdperp, h_dt_nu })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;
    use crate::structures::ContactStructure;
    use crate::subman::Ambient;
    use crate::warped::WarpedDecl;

    fn contact_immersion(map: &[&str], n1: usize, n2: usize, f: &str) -> Immersion {
        let n = n1 + n2;
        let exprs = map.iter().map(|s| parse(s, n, 0).unwrap()).collect();
        let decl = WarpedDecl::new(n1, n2, parse(f, n, 0).unwrap(), vec![]).unwrap();
        Immersion::new(n, exprs, vec![], Ambient::Contact(ContactStructure::standard_sasakian()))
            .unwrap()
            .with_warped(decl)
            .unwrap()
            .with_cr()
            .unwrap()
    }

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn rotated_contact_cr_product() {
        let im = contact_immersion(
            &["x1*cos(x4)", "x1*sin(x4)", "x2*cos(x4)", "x2*sin(x4)", "x3"],
            3,
            1,
            "sqrt(x1^2+x2^2)/2",
        );
        for x in [[0.7, -0.4, 0.3, 0.5], [-1.5, 0.9, -0.8, 1.2]] {
            let s = SffData::compute(&im, &pt(&x)).unwrap();
            let gate = s.cr_gate(&im).unwrap();
            assert!(gate.max() < 1e-12, "{gate:?}");
            let r = s.cr_residuals(&im).unwrap();
            assert!(r.max() < 1e-10, "{r:?}");
            assert!(s.partial_mean(s.leaf()).norm() < 1e-10);
            assert!(s.gauss_residual_max() < 1e-8);
            assert!(s.duality_residual().unwrap() < 1e-10);
        }
    }

    #[test]
    fn transverse_reeb_field_fails_gate() {
        // The horizontal plane z = 0 in the (x, y) directions misses ξ.
        let im = contact_immersion(&["x1", "x2", "x3", "0", "0"], 2, 1, "1");
        let s = SffData::compute(&im, &pt(&[0.2, 0.3, 0.4])).unwrap();
        let gate = s.cr_gate(&im).unwrap();
        assert!(gate.xi_tangent.unwrap() > 0.1);
    }
}
