//! Library output against quantities computed independently, from map
//! values alone by finite differences and classical surface formulas.

use nalgebra::{Matrix2, Vector3};
use warpcheck::exprdsl::{eval_expr, eval_value, parse, Expr};
use warpcheck::gallery;
use warpcheck::jets::Point;
use warpcheck::report::Verdict;
use warpcheck::riemann::{MetricField, PointGeometry};
use warpcheck::runner::{self, RunOptions};
use warpcheck::subman::{Ambient, Immersion, SffData};

const STEP: f64 = 1e-4;

fn pt(x: &[f64]) -> Point {
    Point::new(x.to_vec()).unwrap()
}

/// Map of a surface `R² → R³` evaluated by value only.
struct Surface {
    comps: Vec<Expr>,
}

impl Surface {
    fn new(map: [&str; 3]) -> Self {
        Self { comps: map.iter().map(|s| parse(s, 2, 0).unwrap()).collect() }
    }

    fn at(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::from_fn(|a, _| eval_value(&self.comps[a], &[u, v], &[]).unwrap())
    }

    fn immersion(&self) -> Immersion {
        Immersion::new(2, self.comps.clone(), vec![], Ambient::Plain(MetricField::flat(3))).unwrap()
    }

    /// Shape operator `I⁻¹ II` from central differences and the cross-product normal.
    fn shape_operator(&self, u: f64, v: f64) -> Matrix2<f64> {
        let h = STEP;
        let xu = (self.at(u + h, v) - self.at(u - h, v)) / (2.0 * h);
        let xv = (self.at(u, v + h) - self.at(u, v - h)) / (2.0 * h);
        let c = self.at(u, v);
        let xuu = (self.at(u + h, v) - 2.0 * c + self.at(u - h, v)) / (h * h);
        let xvv = (self.at(u, v + h) - 2.0 * c + self.at(u, v - h)) / (h * h);
        let xuv = (self.at(u + h, v + h) - self.at(u + h, v - h) - self.at(u - h, v + h) + self.at(u - h, v - h)) / (4.0 * h * h);
        let nu = xu.cross(&xv).normalize();
        let first = Matrix2::new(xu.dot(&xu), xu.dot(&xv), xu.dot(&xv), xv.dot(&xv));
        let second = Matrix2::new(nu.dot(&xuu), nu.dot(&xuv), nu.dot(&xuv), nu.dot(&xvv));
        first.try_inverse().unwrap() * second
    }
}

fn surfaces() -> Vec<(Surface, Vec<[f64; 2]>)> {
    vec![
        (
            Surface::new(["sin(x1)*cos(x2)", "sin(x1)*sin(x2)", "cos(x1)"]),
            vec![[0.4, 0.1], [1.2, 2.0], [2.5, 4.0]],
        ),
        (
            Surface::new(["(2 + cos(x1))*cos(x2)", "(2 + cos(x1))*sin(x2)", "sin(x1)"]),
            vec![[0.0, 0.0], [1.0, 0.5], [3.0, 5.5], [4.5, 1.0]],
        ),
        (
            Surface::new(["x1", "x2", "0.7*x1^2 - 0.4*x1*x2 + 0.3*sin(x2)"]),
            vec![[0.0, 0.0], [-0.8, 0.6], [1.1, -1.3]],
        ),
    ]
}

#[test]
fn surface_curvatures_match_classical_formulas() {
    for (surface, points) in surfaces() {
        let im = surface.immersion();
        for [u, v] in points {
            let s = SffData::compute(&im, &pt(&[u, v])).unwrap();
            let shape = surface.shape_operator(u, v);
            let gauss = shape.determinant();
            let mean = shape.trace().abs() / 2.0;
            let norm_sq = (shape * shape).trace();
            let tau = s.intrinsic.scalar_curvature().unwrap();
            assert!((tau - gauss).abs() < 1e-5, "K at ({u},{v}): {tau} vs {gauss}");
            assert!((s.mean_norm() - mean).abs() < 1e-5, "|H| at ({u},{v}): {} vs {mean}", s.mean_norm());
            assert!((s.norm_sq() - norm_sq).abs() < 1e-5, "|h|² at ({u},{v}): {} vs {norm_sq}", s.norm_sq());
        }
    }
}

#[test]
fn warped_surface_curvature_and_laplacian_match_finite_differences() {
    let f_text = "2 + sin(1.3*x1) + 0.2*x1^2";
    let f = parse(f_text, 2, 0).unwrap();
    let g = MetricField::parse(&[vec!["1".to_string(), "0".to_string()], vec!["0".to_string(), format!("({f_text})^2")]], vec![])
        .unwrap();
    let psi = parse("x1^2*cos(x2) + exp(0.5*x1)", 2, 0).unwrap();
    let val = |e: &Expr, x: [f64; 2]| eval_value(e, &x, &[]).unwrap();
    let h = 1e-4;
    for x in [[0.3, 0.2], [-1.0, 2.0], [1.7, -0.5]] {
        let geo = PointGeometry::at(&g, &pt(&x)).unwrap();
        let fx = val(&f, x);
        let fpp = (val(&f, [x[0] + h, x[1]]) - 2.0 * fx + val(&f, [x[0] - h, x[1]])) / (h * h);
        let k = geo.scalar_curvature().unwrap();
        assert!((k + fpp / fx).abs() < 1e-5, "K = {k}, −f''/f = {}", -fpp / fx);

        // −(1/f) ∂1(f ∂1ψ) − f⁻² ∂2²ψ, with the flux taken at half steps.
        let flux = |a: f64| {
            let d1 = (val(&psi, [a + h, x[1]]) - val(&psi, [a - h, x[1]])) / (2.0 * h);
            val(&f, [a, x[1]]) * d1
        };
        let hh = 1e-3;
        let div = (flux(x[0] + hh) - flux(x[0] - hh)) / (2.0 * hh);
        let p = val(&psi, x);
        let d22 = (val(&psi, [x[0], x[1] + h]) - 2.0 * p + val(&psi, [x[0], x[1] - h])) / (h * h);
        let oracle = -div / fx - d22 / (fx * fx);
        let jet = eval_expr(&psi, &pt(&x), &[]).unwrap();
        let lap = geo.laplacian(&jet);
        assert!((lap - oracle).abs() < 1e-5 * oracle.abs().max(1.0), "Δψ = {lap}, oracle {oracle}");
    }
}

#[test]
fn rotating_plane_has_the_hand_computed_second_fundamental_form() {
    let map = ["x1*cos(x3)", "x2*cos(x3)", "x1*sin(x3)", "x2*sin(x3)"];
    let exprs = map.iter().map(|s| parse(s, 3, 0).unwrap()).collect();
    let im = Immersion::new(3, exprs, vec![], Ambient::Plain(MetricField::flat(4))).unwrap();
    for x in [[1.0, 0.5, 0.3], [-0.4, 1.9, 1.2], [0.2, -0.1, 0.7]] {
        let s = SffData::compute(&im, &pt(&x)).unwrap();
        let r_sq = x[0] * x[0] + x[1] * x[1];
        assert!((s.norm_sq() - 2.0 / r_sq).abs() < 1e-9 * (2.0 / r_sq));
        assert!(s.mean_norm() < 1e-9);
        // Flat ambient: the scalar curvature is −|h|²/2.
        let tau = s.intrinsic.scalar_curvature().unwrap();
        assert!((tau + 1.0 / r_sq).abs() < 1e-8);
    }
}

#[test]
fn every_builtin_passes_its_full_run() {
    let opts = RunOptions { points: 24, ..RunOptions::default() };
    for name in gallery::names() {
        let ex = gallery::load_builtin(name).unwrap();
        let report = runner::run(&ex, name, &opts).unwrap();
        let failed: Vec<&str> = report.checks.iter().filter(|c| c.pass == Some(false)).map(|c| c.name.as_str()).collect();
        assert_eq!(report.verdict, Verdict::Pass, "{name}: failed {failed:?}");
        assert!(report.checks.len() > 1, "{name} ran only the gate");
    }
}
