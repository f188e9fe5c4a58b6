use nalgebra::{Cholesky, DMatrix, DVector};

use super::{Ambient, Immersion};
use crate::error::GeomError;
use crate::jets::Point;
use crate::riemann::{
    complete_by_pivoting, frame_pair_sum, gram_schmidt, gram_schmidt_skipping, unit, MetricJet, MetricSource,
    OrthoFrame, PointGeometry,
};

/// Relative residual below which a frame seed counts as already spanned.
const SEED_TOL: f64 = 1e-10;
/// Tangential part of a supposed normal vector above which it is rejected.
pub const NORMAL_TOL: f64 = 1e-8;
/// Singular value threshold for the relative null space.
pub const NULL_SPACE_TOL: f64 = 1e-8;

/// Second-order extrinsic data of an immersion at one point.
///
/// Tangent frame vectors are in sub-chart components, orthonormal for the
/// induced metric; when blocks are declared the first `n1` span the leaf
/// block and the rest the fiber block. Normal frame vectors are in ambient
/// components. `h[r][(i, j)]` is `g(h(e_i, e_j), ν_r)`.
#[derive(Debug, Clone)]
pub struct SffData {
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    /// `∂_i φ^a` at `(a, i)`.
    pub jacobian: DMatrix<f64>,
    /// `∂_p ∂_q φ` at `p * n + q`.
    hessian: Vec<DVector<f64>>,
    pub ambient: PointGeometry,
    ambient_jet: MetricJet,
    pub induced_jet: MetricJet,
    pub intrinsic: PointGeometry,
    pub tangent: OrthoFrame,
    /// Push-forwards `dφ(e_i)` of the tangent frame.
    pub pushed: Vec<DVector<f64>>,
    pub normal: OrthoFrame,
    /// Coefficients against coordinate vectors: `g(h(∂_p, ∂_q), ν_r)`.
    pub h_coord: Vec<DMatrix<f64>>,
    pub h: Vec<DMatrix<f64>>,
    /// Mean curvature vector in normal frame components.
    pub mean: DVector<f64>,
    /// `(n1, n2)` when the immersion declares warped blocks.
    pub blocks: Option<(usize, usize)>,
    /// `J` or `φ` at the image point.
    pub structure: Option<DMatrix<f64>>,
    /// Reeb field at the image point, for contact ambients.
    pub xi: Option<DVector<f64>>,
    /// Number of leading normal frame vectors seeded from the structure
    /// applied to the fiber frame (the `F D_⊥` part of the normal space).
    pub fiber_image_count: usize,
}

impl SffData {
    pub fn compute(im: &Immersion, x: &Point) -> Result<Self, GeomError> {
        let (n, m) = (im.sub_dim(), im.ambient_dim());
        let jets = im.map_jets(x)?;
        let img = im.image(&jets)?;
        let jacobian = DMatrix::from_fn(m, n, |a, i| jets[a].d1(i));
        let hessian: Vec<DVector<f64>> = (0..n * n)
            .map(|pq| DVector::from_fn(m, |a, _| jets[a].d2(pq / n, pq % n)))
            .collect();

        let ambient_jet = im.ambient.metric().metric_jet(&img)?;
        let all: Vec<usize> = (0..m).collect();
        let ambient = PointGeometry::from_jet(&ambient_jet, &all, img.coords())?;
        let induced_jet = im.induced_jet(x, &jets)?;
        let sub: Vec<usize> = (0..n).collect();
        let intrinsic = PointGeometry::from_jet(&induced_jet, &sub, x.coords())?;
        let g = intrinsic.metric().clone();
        let big_g = ambient.metric().clone();

        let (structure, xi) = match &im.ambient {
            Ambient::Plain(_) => (None, None),
            Ambient::Complex(s) => (Some(s.j_at(&img)?), None),
            Ambient::Contact(s) => {
                let xi = s.xi.eval(&img)?.0;
                (Some(s.phi.eval(&img)?.0), Some(xi.column(0).into_owned()))
            }
        };

        let blocks = im.warped.as_ref().map(|d| (d.leaf().len(), d.fiber().len()));
        let tangent_vectors = match blocks {
            None => gram_schmidt(&g, &[], &(0..n).map(|i| unit(n, i)).collect::<Vec<_>>())?,
            Some((n1, _)) => {
                let mut seeds = Vec::with_capacity(n1 + 1);
                if let Some(xi) = &xi {
                    // Leaf part of the tangential preimage of ξ, so that ξ is a frame vector when it lies in the leaf.
                    let mut c = tangential_preimage(&g, &jacobian, &big_g, xi, x)?;
                    for k in n1..n {
                        c[k] = 0.0;
                    }
                    seeds.push(c);
                }
                seeds.extend((0..n1).map(|i| unit(n, i)));
                let leaf = gram_schmidt_skipping(&g, &[], &seeds, n1, SEED_TOL);
                if leaf.len() < n1 {
                    return Err(GeomError::DependentVectors { index: leaf.len() });
                }
                let fiber = gram_schmidt(&g, &leaf, &(n1..n).map(|i| unit(n, i)).collect::<Vec<_>>())?;
                leaf.into_iter().chain(fiber).collect()
            }
        };
        let pushed: Vec<DVector<f64>> = tangent_vectors.iter().map(|e| &jacobian * e).collect();

        let mut fiber_image_count = 0;
        let mut normals = Vec::with_capacity(m - n);
        if let (true, Some(op), Some((n1, n2))) = (im.cr, &structure, blocks) {
            let seeds: Vec<DVector<f64>> = pushed[n1..].iter().map(|v| op * v).collect();
            normals = gram_schmidt_skipping(&big_g, &pushed, &seeds, n2, SEED_TOL);
            fiber_image_count = normals.len();
        }
        let basis: Vec<DVector<f64>> = pushed.iter().chain(&normals).cloned().collect();
        normals.extend(complete_by_pivoting(&big_g, &basis, m - n - normals.len()));
        if normals.len() != m - n {
            return Err(GeomError::DependentVectors { index: n + normals.len() });
        }

        // ∇̃_{∂p} φ_*∂q = ∂_pq φ + Γ̃(∂_pφ, ∂_qφ) (plus a tangential part that ν_r annihilates).
        let accel: Vec<DVector<f64>> = (0..n * n)
            .map(|pq| {
                let (tp, tq) = (jacobian.column(pq / n).into_owned(), jacobian.column(pq % n).into_owned());
                &hessian[pq] + ambient.christoffel_apply(&tp, &tq)
            })
            .collect();
        let h_coord: Vec<DMatrix<f64>> = normals
            .iter()
            .map(|nu| {
                let gnu = &big_g * nu;
                DMatrix::from_fn(n, n, |p, q| 0.5 * (accel[p * n + q].dot(&gnu) + accel[q * n + p].dot(&gnu)))
            })
            .collect();
        let frame = DMatrix::from_fn(n, n, |i, j| tangent_vectors[j][i]);
        let h: Vec<DMatrix<f64>> = h_coord.iter().map(|hc| frame.transpose() * hc * &frame).collect();
        let mean = DVector::from_fn(m - n, |r, _| h[r].trace() / n as f64);

        Ok(Self {
            point: x.coords().to_vec(),
            image: img.coords().to_vec(),
            jacobian,
            hessian,
            ambient,
            ambient_jet,
            induced_jet,
            intrinsic,
            tangent: OrthoFrame { point: x.coords().to_vec(), vectors: tangent_vectors, metric: g },
            pushed,
            normal: OrthoFrame { point: img.coords().to_vec(), vectors: normals, metric: big_g },
            h_coord,
            h,
            mean,
            blocks,
            structure,
            xi,
            fiber_image_count,
        })
    }

    pub fn sub_dim(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn codim(&self) -> usize {
        self.h.len()
    }

    /// Frame indices of the leaf block (all indices when undeclared).
    pub fn leaf(&self) -> std::ops::Range<usize> {
        0..self.blocks.map_or(self.sub_dim(), |(n1, _)| n1)
    }

    /// Frame indices of the fiber block (empty when undeclared).
    pub fn fiber(&self) -> std::ops::Range<usize> {
        self.leaf().end..self.sub_dim()
    }

    /// `h(e_i, e_j)` in normal frame components.
    pub fn h_frame(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.codim(), |r, _| self.h[r][(i, j)])
    }

    /// `h(U, V)` in normal frame components, for sub-chart vectors.
    pub fn h_apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.codim(), |r, _| u.dot(&(&self.h_coord[r] * v)))
    }

    /// Normal frame components as an ambient vector.
    pub fn normal_vector(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.image.len());
        for (c, nu) in coeffs.iter().zip(&self.normal.vectors) {
            out.axpy(*c, nu, 1.0);
        }
        out
    }

    /// `‖h‖² = Σ (h^r_ij)²`.
    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|hr| hr.norm_squared()).sum()
    }

    pub fn mean_norm(&self) -> f64 {
        self.mean.norm()
    }

    /// Partial mean curvature vector over a block of frame indices.
    pub fn partial_mean(&self, block: std::ops::Range<usize>) -> DVector<f64> {
        let k = block.len();
        if k == 0 {
            return DVector::zeros(self.codim());
        }
        DVector::from_fn(self.codim(), |r, _| block.clone().map(|i| self.h[r][(i, i)]).sum::<f64>() / k as f64)
    }

    /// `|g(h(e_i,e_j), ν_r) − h^r_ij|` with `h(e_i,e_j)` recomputed as the
    /// normal projection of the ambient acceleration.
    pub fn coefficient_residual(&self) -> f64 {
        let n = self.sub_dim();
        let g = self.tangent.metric.clone();
        let big_g = &self.normal.metric;
        let ginv = g.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n));
        let mut worst: f64 = 0.0;
        for (i, ei) in self.tangent.vectors.iter().enumerate() {
            for (j, ej) in self.tangent.vectors.iter().enumerate() {
                let mut acc = DVector::zeros(self.image.len());
                for p in 0..n {
                    for q in 0..n {
                        let w = ei[p] * ej[q];
                        if w == 0.0 {
                            continue;
                        }
                        let tp = self.jacobian.column(p).into_owned();
                        let tq = self.jacobian.column(q).into_owned();
                        acc += (&self.hessian[p * n + q] + self.ambient.christoffel_apply(&tp, &tq)) * w;
                    }
                }
                // Derivatives of the frame coefficients only add tangential terms.
                let tangential = &self.jacobian * (&ginv * (self.jacobian.transpose() * (big_g * &acc)));
                let normal_part = acc - tangential;
                for (r, nu) in self.normal.vectors.iter().enumerate() {
                    worst = worst.max((normal_part.dot(&(big_g * nu)) - self.h[r][(i, j)]).abs());
                }
            }
        }
        worst
    }

    /// Shape operator `A_ζ` as a matrix on sub-chart components, computed
    /// through the Weingarten formula `A_ζ X = −(∇̃_X ζ)^T` by differentiating
    /// the normal projection of the constant extension of `ζ`.
    pub fn shape_operator(&self, zeta: &DVector<f64>) -> Result<DMatrix<f64>, GeomError> {
        let n = self.sub_dim();
        let m = self.image.len();
        if zeta.len() != m {
            return Err(GeomError::DimensionMismatch { expected: m, found: zeta.len() });
        }
        let g = &self.tangent.metric;
        let big_g = &self.normal.metric;
        let chol = Cholesky::new(g.clone()).ok_or_else(|| GeomError::DegenerateMetric { point: self.point.clone() })?;
        let b = self.jacobian.transpose() * (big_g * zeta);
        let tangential = &self.jacobian * chol.solve(&b);
        let tan_norm = tangential.dot(&(big_g * &tangential)).max(0.0).sqrt();
        let zeta_norm = zeta.dot(&(big_g * zeta)).max(0.0).sqrt();
        if tan_norm > NORMAL_TOL * zeta_norm.max(1.0) {
            return Err(GeomError::InvalidNormal { tangential: tan_norm });
        }
        let dg_amb: Vec<DMatrix<f64>> = (0..m).map(|a| self.ambient_jet.d1(a)).collect();
        let mut a_mat = DMatrix::zeros(n, n);
        for k in 0..n {
            // ∂_k G along the immersion.
            let mut dk_g = DMatrix::zeros(m, m);
            for (a, dga) in dg_amb.iter().enumerate() {
                let t = self.jacobian[(a, k)];
                if t != 0.0 {
                    dk_g += dga * t;
                }
            }
            let dk_t = DMatrix::from_fn(m, n, |a, i| self.hessian[k * n + i][a]);
            let dk_b = dk_t.transpose() * (big_g * zeta) + self.jacobian.transpose() * (&dk_g * zeta);
            let dk_c = chol.solve(&dk_b);
            let dk_zeta = -(&self.jacobian * dk_c);
            let tk = self.jacobian.column(k).into_owned();
            let cov = dk_zeta + self.ambient.christoffel_apply(&tk, zeta);
            let col = -chol.solve(&(self.jacobian.transpose() * (big_g * cov)));
            a_mat.set_column(k, &col);
        }
        Ok(a_mat)
    }

    /// `max |g(A_ν e_i, e_j) − g(h(e_i,e_j), ν)|` over the normal frame.
    pub fn duality_residual(&self) -> Result<f64, GeomError> {
        let g = &self.tangent.metric;
        let mut worst: f64 = 0.0;
        for (r, nu) in self.normal.vectors.iter().enumerate() {
            let a = self.shape_operator(nu)?;
            for (i, ei) in self.tangent.vectors.iter().enumerate() {
                let aei = &a * ei;
                for (j, ej) in self.tangent.vectors.iter().enumerate() {
                    worst = worst.max((aei.dot(&(g * ej)) - self.h[r][(i, j)]).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Induced curvature minus ambient curvature minus the `h` terms, for
    /// frame indices `(i, j, k, l)`.
    pub fn gauss_residual(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let e = &self.tangent.vectors;
        let p = &self.pushed;
        let induced = self.intrinsic.curvature(&e[i], &e[j], &e[k], &e[l]);
        let ambient = self.ambient.curvature(&p[i], &p[j], &p[k], &p[l]);
        let hh = |a: usize, b: usize, c: usize, d: usize| self.h_frame(a, b).dot(&self.h_frame(c, d));
        (induced - ambient - hh(i, l, j, k) + hh(i, k, j, l)).abs()
    }

    /// Largest [`Self::gauss_residual`] over all index tuples.
    pub fn gauss_residual_max(&self) -> f64 {
        let n = self.sub_dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max(self.gauss_residual(i, j, k, l));
                    }
                }
            }
        }
        worst
    }

    /// `τ̃` summed over pairs of pushed-forward frame vectors in the given blocks.
    pub fn ambient_tau(&self, us: std::ops::Range<usize>, vs: std::ops::Range<usize>) -> f64 {
        let same = us == vs;
        frame_pair_sum(&self.ambient, &self.pushed[us], &self.pushed[vs], same)
    }

    /// `|2τ − 2τ̃(T_xM) − n²‖H‖² + ‖h‖²|`.
    pub fn scalar_identity_residual(&self) -> Result<f64, GeomError> {
        let n = self.sub_dim();
        let tau = self.intrinsic.scalar_curvature()?;
        let tau_amb = self.ambient_tau(0..n, 0..n);
        let nf = n as f64;
        Ok((2.0 * tau - 2.0 * tau_amb - nf * nf * self.mean.norm_squared() + self.norm_sq()).abs())
    }

    /// Basis (sub-chart components) of `{X : h(X, ·) = 0}`.
    pub fn relative_null_space(&self) -> Vec<DVector<f64>> {
        let (n, k) = (self.sub_dim(), self.codim());
        let mut rows = DMatrix::zeros(n * k + n, n);
        for r in 0..k {
            for j in 0..n {
                for i in 0..n {
                    rows[(j * k + r, i)] = self.h[r][(i, j)];
                }
            }
        }
        // The zero padding keeps the matrix tall so that the SVD returns all of V.
        let svd = rows.svd(false, true);
        let Some(v_t) = svd.v_t else { return Vec::new() };
        let frame = DMatrix::from_fn(n, n, |i, j| self.tangent.vectors[j][i]);
        (0..n)
            .filter(|&s| svd.singular_values[s] <= NULL_SPACE_TOL)
            .map(|s| &frame * v_t.row(s).transpose())
            .collect()
    }
}

/// Sub-chart vector `c` with `dφ(c)` the tangential part of `v`.
pub(crate) fn tangential_preimage(
    g: &DMatrix<f64>,
    jacobian: &DMatrix<f64>,
    big_g: &DMatrix<f64>,
    v: &DVector<f64>,
    x: &Point,
) -> Result<DVector<f64>, GeomError> {
    let chol = Cholesky::new(g.clone()).ok_or_else(|| GeomError::DegenerateMetric { point: x.coords().to_vec() })?;
    Ok(chol.solve(&(jacobian.transpose() * (big_g * v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;
    use crate::riemann::MetricField;
    use crate::structures::ComplexStructure;
    use crate::warped::WarpedDecl;

    fn immersion(map: &[&str], n: usize, ambient: Ambient) -> Immersion {
        let exprs = map.iter().map(|s| parse(s, n, 0).unwrap()).collect();
        Immersion::new(n, exprs, vec![], ambient).unwrap()
    }

    fn flat(m: usize) -> Ambient {
        Ambient::Plain(MetricField::flat(m))
    }

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn sphere() -> Immersion {
        immersion(&["sin(x1)*cos(x2)", "sin(x1)*sin(x2)", "cos(x1)"], 2, flat(3))
    }

    #[test]
    fn circle_curvature_is_one() {
        let im = immersion(&["cos(x1)", "sin(x1)"], 1, flat(2));
        let s = SffData::compute(&im, &pt(&[0.4])).unwrap();
        assert!((s.h[0][(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!(s.duality_residual().unwrap() < 1e-12);
    }

    #[test]
    fn affine_plane_is_totally_geodesic() {
        let im = immersion(&["x1 + 2*x2", "x2 - x1", "3*x1 + 1"], 2, flat(3));
        let s = SffData::compute(&im, &pt(&[0.3, -1.1])).unwrap();
        assert!(s.norm_sq() < 1e-28);
        assert_eq!(s.relative_null_space().len(), 2);
        let a = s.shape_operator(&s.normal.vectors[0]).unwrap();
        assert!(a.abs().max() < 1e-14);
        assert!(s.scalar_identity_residual().unwrap() < 1e-14);
    }

    #[test]
    fn unit_sphere_values() {
        let s = SffData::compute(&sphere(), &pt(&[1.1, 0.7])).unwrap();
        assert!((s.mean_norm() - 1.0).abs() < 1e-12);
        assert!((s.norm_sq() - 2.0).abs() < 1e-12);
        assert!(s.relative_null_space().is_empty());
        let a = s.shape_operator(&s.normal.vectors[0]).unwrap();
        let sign = a[(0, 0)].signum();
        assert!((a * sign - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert!(s.gauss_residual_max() < 1e-10);
        // K = 1 recovered from h alone in flat space.
        assert!((s.intrinsic.scalar_curvature().unwrap() - 1.0).abs() < 1e-10);
        assert!(s.scalar_identity_residual().unwrap() < 1e-10);
        assert!(s.coefficient_residual() < 1e-12);
    }

    #[test]
    fn cylinder_has_ruling_in_null_space() {
        let im = immersion(&["cos(x1)", "sin(x1)", "x2"], 2, flat(3));
        let s = SffData::compute(&im, &pt(&[0.9, 0.2])).unwrap();
        let null = s.relative_null_space();
        assert_eq!(null.len(), 1);
        assert!(null[0][0].abs() < 1e-12 && (null[0][1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotating_plane_hand_values() {
        let map = ["x1*cos(x3)", "x2*cos(x3)", "x1*sin(x3)", "x2*sin(x3)"];
        let f = parse("sqrt(x1^2+x2^2)", 3, 0).unwrap();
        let im = immersion(&map, 3, Ambient::Complex(ComplexStructure::flat(2)))
            .with_warped(WarpedDecl::new(2, 1, f, vec![]).unwrap())
            .unwrap()
            .with_cr()
            .unwrap();
        let (u, v) = (0.6, -1.3);
        let r2: f64 = u * u + v * v;
        let s = SffData::compute(&im, &pt(&[u, v, 0.8])).unwrap();
        assert_eq!(s.fiber_image_count, 1);
        assert!((s.norm_sq() - 2.0 / r2).abs() < 1e-12);
        assert!(s.mean_norm() < 1e-12);
        assert!(s.partial_mean(s.leaf()).norm() < 1e-12);
        assert!(s.h_frame(2, 2).norm() < 1e-12);
        assert!((s.h_frame(0, 2).norm_squared() + s.h_frame(1, 2).norm_squared() - 1.0 / r2).abs() < 1e-12);
        assert!(s.gauss_residual_max() < 1e-9);
        assert!(s.scalar_identity_residual().unwrap() < 1e-9);
        assert!(s.duality_residual().unwrap() < 1e-10);
    }

    #[test]
    fn curved_ambient_identities() {
        // Graph surface inside the upper half-space model of hyperbolic 3-space.
        let g = MetricField::parse(
            &[vec!["1/x3^2", "0", "0"], vec!["0", "1/x3^2", "0"], vec!["0", "0", "1/x3^2"]],
            vec![],
        )
        .unwrap();
        let im = immersion(&["x1", "x2", "1.5 + 0.3*sin(x1)*x2"], 2, Ambient::Plain(g));
        let s = SffData::compute(&im, &pt(&[0.4, 0.7])).unwrap();
        assert!(s.gauss_residual_max() < 1e-9);
        assert!(s.scalar_identity_residual().unwrap() < 1e-9);
        assert!(s.duality_residual().unwrap() < 1e-10);
        assert!(s.coefficient_residual() < 1e-12);
    }

    #[test]
    fn tangential_vector_rejected_as_normal() {
        let s = SffData::compute(&sphere(), &pt(&[1.1, 0.7])).unwrap();
        assert!(matches!(s.shape_operator(&s.pushed[0]), Err(GeomError::InvalidNormal { .. })));
    }
}
