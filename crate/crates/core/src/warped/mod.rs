//! Warped products `N1 ×_f N2` with metric `g1 + f² g2`.
//!
//! Chart coordinates are ordered leaf first: `x1..x{n1}` on `N1`, then
//! `x{n1+1}..x{n1+n2}` on `N2`. The warping function is an expression in the
//! leaf coordinates only. Every Laplacian here is the leaf Laplacian with the
//! geometer's sign.

use nalgebra::DVector;

use crate::error::GeomError;
use crate::exprdsl::{eval_with, BinOp, Expr};
use crate::jets::{Jet3, Point};
use crate::riemann::{MetricField, MetricJet, MetricSource, PointGeometry};

/// Which coordinates form the leaf and fiber blocks, and the warping function.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedDecl {
    pub n1: usize,
    pub n2: usize,
    /// Expression over `x1..x{n1}`.
    pub f: Expr,
    pub params: Vec<f64>,
}

impl WarpedDecl {
    pub fn new(n1: usize, n2: usize, f: Expr, params: Vec<f64>) -> Result<Self, GeomError> {
        if n1 == 0 || n2 == 0 {
            return Err(GeomError::Config("warped blocks must both be non-empty".into()));
        }
        if f.max_var() > n1 {
            return Err(GeomError::Config(format!(
                "warping function uses x{} but the leaf has only {n1} coordinates",
                f.max_var()
            )));
        }
        Ok(Self { n1, n2, f, params })
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn leaf(&self) -> std::ops::Range<usize> {
        0..self.n1
    }

    pub fn fiber(&self) -> std::ops::Range<usize> {
        self.n1..self.n1 + self.n2
    }

    /// Jet of `f` at `x` over the full chart, checking `f > 0`.
    pub fn f_jet(&self, x: &Point) -> Result<Jet3, GeomError> {
        if x.dim() != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let vars = Jet3::variables(x);
        let f = eval_with(&self.f, &vars[..self.n1], &self.params)?;
        if !(f.value() > 0.0) {
            return Err(GeomError::InvalidWarping { value: f.value(), point: x.coords().to_vec() });
        }
        Ok(f)
    }
}

/// `g1 + f² g2` with its assembled block metric.
#[derive(Debug, Clone)]
pub struct WarpedMetric {
    pub g1: MetricField,
    pub g2: MetricField,
    pub decl: WarpedDecl,
    pub assembled: MetricField,
}

impl WarpedMetric {
    /// Builds the block metric. `g1`, `g2` and `f` share one parameter list.
    pub fn assemble(g1: MetricField, g2: MetricField, f: Expr) -> Result<Self, GeomError> {
        if g1.params() != g2.params() {
            return Err(GeomError::Config("leaf and fiber metrics must share parameters".into()));
        }
        let (n1, n2) = (g1.dim(), g2.dim());
        let params = g1.params().to_vec();
        let decl = WarpedDecl::new(n1, n2, f, params.clone())?;
        let n = n1 + n2;
        let f2 = Expr::binary(BinOp::Pow, decl.f.clone(), Expr::num(2.0));
        let mut rows = vec![vec![Expr::num(0.0); n]; n];
        for i in 0..n1 {
            for j in 0..n1 {
                rows[i][j] = g1.entry(i, j).clone();
            }
        }
        for a in 0..n2 {
            for b in 0..n2 {
                let e = g2.entry(a, b).shift_vars(n1);
                rows[n1 + a][n1 + b] = match e.as_number() {
                    Some(v) if v == 0.0 => Expr::num(0.0),
                    Some(v) if v == 1.0 => f2.clone(),
                    _ => Expr::binary(BinOp::Mul, f2.clone(), e),
                };
            }
        }
        let assembled = MetricField::new(rows, params)?;
        Ok(Self { g1, g2, decl, assembled })
    }

    /// True when the warping function is a literal constant.
    pub fn is_trivial(&self) -> bool {
        self.decl.f.max_var() == 0
    }
}

impl MetricSource for WarpedMetric {
    fn dim(&self) -> usize {
        self.assembled.dim()
    }

    fn metric_jet(&self, x: &Point) -> Result<MetricJet, GeomError> {
        self.decl.f_jet(x)?;
        self.assembled.metric_jet(x)
    }
}

/// Scalar quantities of the warping function at a point, all computed on
/// the leaf metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpingTerms {
    pub f: f64,
    /// `Δ f`.
    pub lap_f: f64,
    /// `|∇ ln f|²`.
    pub grad_ln_f_sq: f64,
    /// `Δ ln f`.
    pub lap_ln_f: f64,
}

/// Intrinsic geometry of the leaf block at `x`.
pub fn leaf_geometry(mj: &MetricJet, decl: &WarpedDecl, x: &Point) -> Result<PointGeometry, GeomError> {
    let idx: Vec<usize> = decl.leaf().collect();
    PointGeometry::from_jet(&mj.restrict(&idx), &idx, x.coords())
}

pub fn warping_terms(mj: &MetricJet, decl: &WarpedDecl, x: &Point) -> Result<WarpingTerms, GeomError> {
    let leaf = leaf_geometry(mj, decl, x)?;
    let f = decl.f_jet(x)?;
    let ln_f = f.ln()?;
    Ok(WarpingTerms {
        f: f.value(),
        lap_f: leaf.laplacian(&f),
        grad_ln_f_sq: leaf.grad_norm_sq(&ln_f),
        lap_ln_f: leaf.laplacian(&ln_f),
    })
}

/// Largest violation of the warped block form of a metric jet: the mixed
/// block vanishes, the leaf block ignores fiber coordinates, and the fiber
/// block divided by `f²` ignores leaf coordinates.
pub fn block_form_residual(mj: &MetricJet, decl: &WarpedDecl, x: &Point) -> Result<f64, GeomError> {
    if mj.dim() != decl.dim() {
        return Err(GeomError::DimensionMismatch { expected: decl.dim(), found: mj.dim() });
    }
    let f = decl.f_jet(x)?;
    let fv = f.value();
    let mut worst: f64 = 0.0;
    for a in decl.leaf() {
        for big_a in decl.fiber() {
            worst = worst.max(mj.entry(a, big_a).value().abs());
        }
        for b in decl.leaf() {
            for c in decl.fiber() {
                worst = worst.max(mj.entry(a, b).d1(c).abs());
            }
        }
    }
    for big_a in decl.fiber() {
        for big_b in decl.fiber() {
            let e = mj.entry(big_a, big_b);
            for c in decl.leaf() {
                // ∂_c (g_AB / f²)
                let d = (e.d1(c) - 2.0 * e.value() * f.d1(c) / fv) / (fv * fv);
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}

/// Both sides of `Σ_a Σ_A K(e_a ∧ e_A) = n2 Δf / f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpingIdentity {
    pub mixed_sum: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Mixed sectional sum over a block-adapted orthonormal frame against
/// `n2 Δf / f` with the leaf Laplacian.
pub fn warping_identity(source: &dyn MetricSource, decl: &WarpedDecl, x: &Point) -> Result<WarpingIdentity, GeomError> {
    let mj = source.metric_jet(x)?;
    let idx: Vec<usize> = (0..mj.dim()).collect();
    let geo = PointGeometry::from_jet(&mj, &idx, x.coords())?;
    let frame = geo.orthonormal_frame(None)?;
    let (leaf, fiber) = frame.vectors.split_at(decl.n1);
    let mut mixed_sum = 0.0;
    for u in leaf {
        for v in fiber {
            mixed_sum += geo.sectional(u, v)?;
        }
    }
    let t = warping_terms(&mj, decl, x)?;
    let rhs = decl.n2 as f64 * t.lap_f / t.f;
    Ok(WarpingIdentity { mixed_sum, rhs, residual: (mixed_sum - rhs).abs() })
}

/// Largest violation of the factor geometry of a warped product: leaves are
/// totally geodesic (`Γ^A_ab = 0`) and the leaf part of `∇_{∂A} ∂B` is
/// `−(g_AB / f) ∇f`.
pub fn factor_geometry_residual(geo: &PointGeometry, decl: &WarpedDecl, x: &Point) -> Result<f64, GeomError> {
    let f = decl.f_jet(x)?;
    let grad_f: DVector<f64> = geo.gradient(&f);
    let g = geo.metric();
    let mut worst: f64 = 0.0;
    for big_a in decl.fiber() {
        for a in decl.leaf() {
            for b in decl.leaf() {
                worst = worst.max(geo.christoffel(big_a, a, b).abs());
            }
        }
        for big_b in decl.fiber() {
            for a in decl.leaf() {
                let want = -g[(big_a, big_b)] / f.value() * grad_f[a];
                worst = worst.max((geo.christoffel(a, big_a, big_b) - want).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn rows<'a>(m: &[&[&'a str]]) -> Vec<Vec<&'a str>> {
        m.iter().map(|r| r.to_vec()).collect()
    }

    fn warped(g1: &[&[&str]], g2: &[&[&str]], f: &str) -> WarpedMetric {
        let g1 = MetricField::parse(&rows(g1), vec![]).unwrap();
        let g2 = MetricField::parse(&rows(g2), vec![]).unwrap();
        let n1 = g1.dim();
        WarpedMetric::assemble(g1, g2, parse(f, n1, 0).unwrap()).unwrap()
    }

    #[test]
    fn hyperbolic_plane() {
        let w = warped(&[&["1"]], &[&["1"]], "exp(x1)");
        let x = pt(&[0.3, 0.8]);
        let mj = w.metric_jet(&x).unwrap();
        assert!((mj.entry(1, 1).value() - 0.6f64.exp()).abs() < 1e-14);
        let id = warping_identity(&w, &w.decl, &x).unwrap();
        assert!((id.mixed_sum + 1.0).abs() < 1e-12);
        assert!((id.rhs + 1.0).abs() < 1e-12);
        assert!(id.residual < 1e-9);
    }

    #[test]
    fn sphere_presentation() {
        let w = warped(&[&["1"]], &[&["1"]], "sin(x1)");
        let x = pt(&[1.0, 2.0]);
        let id = warping_identity(&w, &w.decl, &x).unwrap();
        assert!((id.mixed_sum - 1.0).abs() < 1e-12);
        assert!((id.rhs - 1.0).abs() < 1e-12);
        let geo = PointGeometry::at(&w, &x).unwrap();
        assert!(factor_geometry_residual(&geo, &w.decl, &x).unwrap() < 1e-14);
    }

    #[test]
    fn constant_warping_is_a_product() {
        let w = warped(&[&["1"]], &[&["2"]], "1");
        assert!(w.is_trivial());
        let x = pt(&[0.1, 0.2]);
        let mj = w.metric_jet(&x).unwrap();
        assert_eq!(mj.value().as_slice(), &[1.0, 0.0, 0.0, 2.0]);
        let id = warping_identity(&w, &w.decl, &x).unwrap();
        assert_eq!((id.mixed_sum, id.rhs), (0.0, 0.0));
    }

    #[test]
    fn nonpositive_warping_rejected() {
        let w = warped(&[&["1"]], &[&["1"]], "x1");
        assert!(matches!(w.metric_jet(&pt(&[-0.5, 0.0])), Err(GeomError::InvalidWarping { .. })));
    }

    #[test]
    fn warping_function_confined_to_leaf() {
        let g = MetricField::flat(1);
        assert!(WarpedMetric::assemble(g.clone(), g, parse("x2", 2, 0).unwrap()).is_err());
    }

    #[test]
    fn log_laplacian_two_ways() {
        let w = warped(&[&["1", "0"], &["0", "1"]], &[&["1"]], "sqrt(x1^2+x2^2)");
        let x = pt(&[0.7, -0.4, 0.2]);
        let mj = w.metric_jet(&x).unwrap();
        let t = warping_terms(&mj, &w.decl, &x).unwrap();
        let r2 = 0.7f64 * 0.7 + 0.4 * 0.4;
        assert!((t.lap_f + 1.0 / r2.sqrt()).abs() < 1e-13);
        assert!((t.grad_ln_f_sq - 1.0 / r2).abs() < 1e-13);
        assert!(t.lap_ln_f.abs() < 1e-13);
        assert!((t.lap_ln_f - (t.lap_f / t.f + t.grad_ln_f_sq)).abs() < 1e-13);
        assert!(block_form_residual(&mj, &w.decl, &x).unwrap() < 1e-15);
    }

    #[test]
    fn non_warped_metric_fails_block_gate() {
        let m = MetricField::parse(&[vec!["x2^2+1", "0"], vec!["0", "1"]], vec![]).unwrap();
        let decl = WarpedDecl::new(1, 1, parse("1", 1, 0).unwrap(), vec![]).unwrap();
        let x = pt(&[0.2, 0.5]);
        let mj = m.metric_jet(&x).unwrap();
        assert!(block_form_residual(&mj, &decl, &x).unwrap() > 0.1);
    }
}
