//! Extrinsic geometry of an immersion `φ: M → M̃` given by coordinate
//! expressions: induced metric, adapted frames, second fundamental form,
//! shape operator and the classification predicates.
//!
//! Conventions: `h(X,Y) = (∇̃_X Y)^⊥`, `g(A_ζ X, Y) = g(h(X,Y), ζ)`, mean
//! curvature `H = (1/n) tr h`, and `‖h‖² = Σ (h^r_ij)²` over orthonormal
//! tangent and normal frames. Normals are oriented by the frame
//! construction, not geometrically.

mod classify;
mod contact_cr;
mod sff;

pub use classify::{classify, ClassFlag, Classification};
pub use contact_cr::{CrGate, CrResiduals};
pub use sff::SffData;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::GeomError;
use crate::exprdsl::{eval_expr, eval_with, Expr};
use crate::jets::{Jet3, Point};
use crate::riemann::{MetricField, MetricJet, MetricSource};
use crate::structures::{ComplexStructure, ContactStructure};
use crate::warped::WarpedDecl;

/// The ambient manifold with its optional structure.
#[derive(Debug, Clone)]
pub enum Ambient {
    Plain(MetricField),
    Complex(ComplexStructure),
    Contact(ContactStructure),
}

impl Ambient {
    pub fn metric(&self) -> &MetricField {
        match self {
            Ambient::Plain(g) => g,
            Ambient::Complex(s) => &s.metric,
            Ambient::Contact(s) => &s.metric,
        }
    }

    pub fn dim(&self) -> usize {
        self.metric().dim()
    }
}

/// Smallest singular value of the differential (in the ambient norm) below
/// which an immersion is treated as degenerate.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// An immersion of an `n`-dimensional chart into an ambient chart.
#[derive(Debug, Clone)]
pub struct Immersion {
    n: usize,
    map: Vec<Expr>,
    params: Vec<f64>,
    pub ambient: Ambient,
    /// Leaf and fiber blocks, when the submanifold is declared a warped product.
    pub warped: Option<WarpedDecl>,
    /// Whether the leaf/fiber blocks are declared the invariant and
    /// anti-invariant distributions of a CR-submanifold.
    pub cr: bool,
}

impl Immersion {
    pub fn new(n: usize, map: Vec<Expr>, params: Vec<f64>, ambient: Ambient) -> Result<Self, GeomError> {
        if n == 0 {
            return Err(GeomError::Config("submanifold chart must have positive dimension".into()));
        }
        let m = ambient.dim();
        if map.len() != m {
            return Err(GeomError::DimensionMismatch { expected: m, found: map.len() });
        }
        if n >= m {
            return Err(GeomError::Config(format!("submanifold dimension {n} must be below ambient dimension {m}")));
        }
        if let Some(e) = map.iter().find(|e| e.max_var() > n) {
            return Err(GeomError::DimensionMismatch { expected: n, found: e.max_var() });
        }
        Ok(Self { n, map, params, ambient, warped: None, cr: false })
    }

    pub fn with_warped(mut self, decl: WarpedDecl) -> Result<Self, GeomError> {
        if decl.dim() != self.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, found: decl.dim() });
        }
        self.warped = Some(decl);
        Ok(self)
    }

    /// Declares the leaf block invariant and the fiber block anti-invariant
    /// under the ambient `J` (Kähler case) or `φ` (contact case, where the
    /// leaf also carries `ξ`).
    pub fn with_cr(mut self) -> Result<Self, GeomError> {
        if self.warped.is_none() {
            return Err(GeomError::Config("a CR declaration needs the warped blocks".into()));
        }
        if matches!(self.ambient, Ambient::Plain(_)) {
            return Err(GeomError::Config("a CR declaration needs an ambient complex or contact structure".into()));
        }
        self.cr = true;
        Ok(self)
    }

    pub fn sub_dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[Expr] {
        &self.map
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Jets of the component functions at `x`.
    pub fn map_jets(&self, x: &Point) -> Result<Vec<Jet3>, GeomError> {
        if x.dim() != self.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, found: x.dim() });
        }
        self.map.iter().map(|e| eval_expr(e, x, &self.params).map_err(GeomError::from)).collect()
    }

    /// Image point in the ambient chart.
    pub fn image(&self, jets: &[Jet3]) -> Result<Point, GeomError> {
        Ok(Point::new(jets.iter().map(Jet3::value).collect())?)
    }

    /// Induced metric `g_ij = G_ab(φ) ∂_iφ^a ∂_jφ^b` as jets exact through
    /// second order, from the component jets.
    pub fn induced_jet(&self, x: &Point, jets: &[Jet3]) -> Result<MetricJet, GeomError> {
        let (n, m) = (self.n, self.ambient_dim());
        let metric = self.ambient.metric();
        // ∂_i φ^a as jets: dphi[a][i]
        let dphi: Vec<Vec<Jet3>> = jets.iter().map(|p| (0..n).map(|i| p.differentiate(i)).collect()).collect();
        let flat = metric.is_constant();
        let mut big_g: Vec<Jet3> = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                if b < a {
                    let v = big_g[b * m + a].clone();
                    big_g.push(v);
                } else {
                    big_g.push(eval_with(metric.entry(a, b), jets, metric.params())?);
                }
            }
        }
        // w[a][j] = Σ_b G_ab ∂_j φ^b
        let mut w: Vec<Vec<Jet3>> = Vec::with_capacity(m);
        for a in 0..m {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = Jet3::constant(0.0, n)?;
                for b in 0..m {
                    let gab = &big_g[a * m + b];
                    if flat {
                        if gab.value() != 0.0 {
                            acc = &acc + &dphi[b][j].scale(gab.value());
                        }
                    } else {
                        acc = &acc + &(gab * &dphi[b][j]);
                    }
                }
                row.push(acc);
            }
            w.push(row);
        }
        let mut entries = vec![Jet3::constant(0.0, n)?; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Jet3::constant(0.0, n)?;
                for a in 0..m {
                    acc = &acc + &(&dphi[a][i] * &w[a][j]);
                }
                entries[j * n + i] = acc.clone();
                entries[i * n + j] = acc;
            }
        }
        let mj = MetricJet::new(n, entries, x.coords())?;
        check_rank(&mj.value(), x)?;
        Ok(mj)
    }
}

fn check_rank(g: &DMatrix<f64>, x: &Point) -> Result<(), GeomError> {
    let eig = SymmetricEigen::new(g.clone());
    let sigma = eig.eigenvalues.min().max(0.0).sqrt();
    if !(sigma > RANK_THRESHOLD) {
        return Err(GeomError::DegenerateImmersion { sigma, point: x.coords().to_vec() });
    }
    Ok(())
}

impl MetricSource for Immersion {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric_jet(&self, x: &Point) -> Result<MetricJet, GeomError> {
        let jets = self.map_jets(x)?;
        self.induced_jet(x, &jets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;

    pub(crate) fn immersion(map: &[&str], n: usize, ambient: Ambient) -> Immersion {
        let exprs = map.iter().map(|s| parse(s, n, 0).unwrap()).collect();
        Immersion::new(n, exprs, vec![], ambient).unwrap()
    }

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn identity_immersion_is_flat() {
        let im = immersion(&["x1", "x2", "0"], 2, Ambient::Plain(MetricField::flat(3)));
        let mj = im.metric_jet(&pt(&[0.3, 0.4])).unwrap();
        assert_eq!(mj.value(), DMatrix::identity(2, 2));
        assert!((0..2).all(|k| mj.d1(k).iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn unit_circle_has_unit_metric() {
        let im = immersion(&["cos(x1)", "sin(x1)"], 1, Ambient::Plain(MetricField::flat(2)));
        let mj = im.metric_jet(&pt(&[0.7])).unwrap();
        assert!((mj.entry(0, 0).value() - 1.0).abs() < 1e-15);
        assert!(mj.entry(0, 0).d2(0, 0).abs() < 1e-14);
    }

    #[test]
    fn rotating_plane_is_warped() {
        let im = immersion(&["x1*cos(x3)", "x2*cos(x3)", "x1*sin(x3)", "x2*sin(x3)"], 3, Ambient::Complex(ComplexStructure::flat(2)));
        let x = pt(&[0.6, -0.8, 0.9]);
        let g = im.metric_jet(&x).unwrap().value();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((g - want).abs().max() < 1e-15);
    }

    #[test]
    fn pulled_back_metric_composes() {
        // Cylindrical chart of R³ pulled back through a reparametrised plane.
        let polar = MetricField::parse(&[vec!["1", "0", "0"], vec!["0", "x1^2", "0"], vec!["0", "0", "1"]], vec![]).unwrap();
        let im = immersion(&["x1^2", "x2", "0"], 2, Ambient::Plain(polar));
        let x = pt(&[1.2, 0.3]);
        let mj = im.metric_jet(&x).unwrap();
        // g = (2 x1)² dx1² + x1⁴ dx2²
        assert!((mj.entry(0, 0).value() - 4.0 * 1.44).abs() < 1e-13);
        assert!((mj.entry(1, 1).d2(0, 0) - 12.0 * 1.44).abs() < 1e-12);
    }

    #[test]
    fn degenerate_immersion_rejected() {
        let im = immersion(&["x1^3", "x2", "0"], 2, Ambient::Plain(MetricField::flat(3)));
        assert!(matches!(im.metric_jet(&pt(&[0.0, 1.0])), Err(GeomError::DegenerateImmersion { .. })));
    }
}
