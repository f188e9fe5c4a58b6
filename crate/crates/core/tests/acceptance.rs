//! Acceptance suite: one pass/fail line per criterion. Exits non-zero when
//! any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpcheck::config::{Example, Subject};
use warpcheck::gallery;
use warpcheck::ineq::{self, AmbientCurvature};
use warpcheck::jets::Point;
use warpcheck::report::Report;
use warpcheck::runner::{self, CheckGroup, RunOptions};
use warpcheck::sampling::halton_points;
use warpcheck::structures::{ModelTensors, SpaceFormKind, SpaceFormModel};
use warpcheck::subman::{Immersion, SffData};
use warpcheck::warped::warping_identity;

const POINTS: usize = 64;
const SEED: u64 = 42;

type Verdict = Result<String, String>;

fn example(name: &str) -> Example {
    // Gate failures surface here as errors: no built-in is used ungated.
    gallery::load_builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn immersion(ex: &Example) -> &Immersion {
    match &ex.subject {
        Subject::Immersion(im) => im,
        _ => panic!("{} is not an immersion", ex.name()),
    }
}

fn run(name: &str, groups: &[CheckGroup]) -> Report {
    let opts = RunOptions { checks: groups.iter().copied().collect(), points: POINTS, seed: SEED, ..RunOptions::default() };
    runner::run(&example(name), name, &opts).unwrap()
}

/// Worst value of a record, requiring one value per sample point.
fn worst(report: &Report, check: &str, expected_points: usize) -> Result<f64, String> {
    let rec = report.check(check).ok_or_else(|| format!("{}: no `{check}` record", report.config.example))?;
    if rec.values.len() != expected_points {
        return Err(format!("{}: `{check}` has {} values, expected {expected_points}", report.config.example, rec.values.len()));
    }
    Ok(rec.worst)
}

fn require(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sff_at(im: &Immersion, x: &[f64]) -> SffData {
    SffData::compute(im, &Point::new(x.to_vec()).unwrap()).unwrap()
}

fn samples(ex: &Example) -> Vec<Vec<f64>> {
    halton_points(ex.domain(), POINTS, SEED).unwrap()
}

fn c1_gauss() -> Verdict {
    let start = Instant::now();
    let mut max: f64 = 0.0;
    for name in ["chen-cr", "round-s2", "trivial-product", "perturbed-e1", "torus"] {
        let w = worst(&run(name, &[CheckGroup::Identities]), "gauss_equation", POINTS)?;
        if !(w < 1e-7) {
            return Err(format!("{name}: gauss residual {w:e}"));
        }
        max = max.max(w);
    }
    let secs = start.elapsed().as_secs_f64();
    require(secs < 30.0, format!("worst residual {max:.2e} over 5 examples, {secs:.2} s"))
}

fn c2_warping_identity() -> Verdict {
    let mut max: f64 = 0.0;
    for name in ["chen-cr", "hyperbolic-warped", "s2-warped"] {
        let w = worst(&run(name, &[CheckGroup::Identities]), "warping_identity", POINTS)?;
        if !(w < 1e-8) {
            return Err(format!("{name}: residual {w:e}"));
        }
        max = max.max(w);
    }
    // Both sides of the identity take the constant curvature value.
    for (name, side) in [("hyperbolic-warped", -1.0), ("s2-warped", 1.0)] {
        let ex = example(name);
        let Subject::Intrinsic { metric, decl: Some(decl) } = &ex.subject else { return Err(format!("{name}: not intrinsic")) };
        for x in samples(&ex) {
            let r = warping_identity(metric, decl, &Point::new(x.clone()).unwrap()).map_err(|e| e.to_string())?;
            if !((r.mixed_sum - side).abs() < 1e-8 && (r.rhs - side).abs() < 1e-8) {
                return Err(format!("{name} at {x:?}: sides {} and {}, expected {side}", r.mixed_sum, r.rhs));
            }
        }
    }
    Ok(format!("worst residual {max:.2e}; sides -1 and +1 on the curvature examples"))
}

fn c3_scalar_decomposition() -> Verdict {
    let mut max: f64 = 0.0;
    for name in ["chen-cr", "trivial-product"] {
        let w = worst(&run(name, &[CheckGroup::Identities]), "scalar_decomposition", POINTS)?;
        if !(w < 1e-7) {
            return Err(format!("{name}: residual {w:e}"));
        }
        max = max.max(w);
    }
    Ok(format!("worst residual {max:.2e}"))
}

fn c4_dt_minimality() -> Verdict {
    let e1 = worst(&run("chen-cr", &[CheckGroup::Inequalities]), "dt_minimality", POINTS)?;
    let e5_report = run("sasakian-cr-candidate", &[CheckGroup::Inequalities]);
    let gate = e5_report.check("validation_gate").and_then(|c| c.pass);
    if gate != Some(true) {
        return Err("contact candidate fails its gate".into());
    }
    let e5 = worst(&e5_report, "dt_minimality", POINTS)?;
    require(e1 < 1e-8 && e5 < 1e-7, format!("max |H_1|: rotating plane {e1:.2e}, contact candidate {e5:.2e}"))
}

fn c5_main_inequality() -> Verdict {
    let e1 = example("chen-cr");
    let im = immersion(&e1);
    let mut worst_eq: f64 = 0.0;
    for x in samples(&e1) {
        let r = ineq::theorem_main(im, &sff_at(im, &x), AmbientCurvature::Metric, 1e-8).map_err(|e| e.to_string())?;
        let d = r.diagnostics.expect("main inequality reports diagnostics");
        let w = r.slack.abs().max(d.leaf_leaf).max(d.fiber_fiber).max(d.mean);
        if !(w < 1e-8 && r.equality) {
            return Err(format!("rotating plane at {x:?}: slack {:e}, diagnostics {d:?}", r.slack));
        }
        worst_eq = worst_eq.max(w);
    }
    let e6 = example("perturbed-e1");
    let im6 = immersion(&e6);
    let mut min_slack = f64::INFINITY;
    for x in samples(&e6) {
        let r = ineq::theorem_main(im6, &sff_at(im6, &x), AmbientCurvature::Metric, 1e-8).map_err(|e| e.to_string())?;
        if !(r.slack > 1e-3) || r.equality {
            return Err(format!("perturbed example at {x:?}: slack {:e}", r.slack));
        }
        min_slack = min_slack.min(r.slack);
    }
    let e4 = example("trivial-product");
    let im4 = immersion(&e4);
    let mut e4_max: f64 = 0.0;
    for x in samples(&e4) {
        let r = ineq::theorem_main(im4, &sff_at(im4, &x), AmbientCurvature::Metric, 1e-10).map_err(|e| e.to_string())?;
        e4_max = e4_max.max(r.slack.abs());
    }
    require(
        e4_max <= 1e-10,
        format!("equality case worst {worst_eq:.2e}; perturbed min slack {min_slack:.4e}; trivial product |slack| {e4_max:.1e}"),
    )
}

fn c6_csf_special_case() -> Verdict {
    let e1 = example("chen-cr");
    let im = immersion(&e1);
    let mut count = 0;
    for (r, want) in [(0.5, 4.0), (1.0, 1.0), (2.0, 0.25)] {
        for (alpha, t) in [(0.3, 0.2), (1.9, 0.7), (4.0, 1.3)] {
            let x = [r * f64::cos(alpha), r * f64::sin(alpha), t];
            let b = ineq::theorem_csf(im, &sff_at(im, &x), 0.0, 1.0, 1e-8).map_err(|e| e.to_string())?;
            if !((b.bound.lhs - want).abs() < 1e-8 && (b.bound.rhs - want).abs() < 1e-8) {
                return Err(format!("r = {r}: lhs {} rhs {} expected {want}", b.bound.lhs, b.bound.rhs));
            }
            count += 1;
        }
    }
    Ok(format!("lhs = rhs = 1/r^2 at {count} points with r in {{0.5, 1, 2}}"))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize, avoid: Option<&DVector<f64>>) -> DVector<f64> {
    loop {
        let mut v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        if let Some(a) = avoid {
            let c = v.dot(a);
            v.axpy(-c, a, 1.0);
        }
        let n = v.norm();
        if n > 0.1 {
            return v / n;
        }
    }
}

fn c7_space_forms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let complex = ModelTensors::standard_complex(3);
    let contact = ModelTensors::standard_contact(2);
    let xi = contact.xi.clone().expect("contact tensors carry xi");
    let models = [
        (SpaceFormModel::new(SpaceFormKind::Complex, 2.5), &complex, None),
        (SpaceFormModel::generalized(1.5, 0.4), &complex, None),
        (SpaceFormModel::new(SpaceFormKind::Sasakian, 1.7), &contact, Some(1.0)),
        (SpaceFormModel::new(SpaceFormKind::Kenmotsu, -0.6), &contact, Some(-1.0)),
        (SpaceFormModel::new(SpaceFormKind::Cosymplectic, 0.9), &contact, Some(0.0)),
    ];
    let mut worst_var: f64 = 0.0;
    let mut worst_xi: f64 = 0.0;
    for (model, tensors, k_xi) in models {
        let avoid = tensors.xi.as_ref();
        let ks: Vec<f64> = (0..100)
            .map(|_| model.phi_sectional(tensors, &random_unit(&mut rng, tensors.dim(), avoid)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mean = ks.iter().sum::<f64>() / ks.len() as f64;
        let var = ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / ks.len() as f64;
        if !(var < 1e-12 && (mean - model.c).abs() < 1e-10) {
            return Err(format!("{:?}: mean {mean}, variance {var:e}", model.kind));
        }
        worst_var = worst_var.max(var);
        if let Some(want) = k_xi {
            for _ in 0..100 {
                let x = random_unit(&mut rng, tensors.dim(), Some(&xi));
                let k = model.sectional(tensors, &x, &xi).map_err(|e| e.to_string())?;
                if !((k - want).abs() < 1e-10) {
                    return Err(format!("{:?}: K(X, xi) = {k}, expected {want}", model.kind));
                }
                worst_xi = worst_xi.max((k - want).abs());
            }
        }
    }
    Ok(format!("5 models, variance <= {worst_var:.1e}, |K(X,xi) - expected| <= {worst_xi:.1e}"))
}

fn c8_contact_suite() -> Verdict {
    let report = run("sasakian-r5", &[CheckGroup::Structure]);
    let mut max: f64 = 0.0;
    for check in ["almost_contact", "contact_class", "normality", "contact_metric"] {
        let w = worst(&report, check, POINTS)?;
        if !(w < 1e-8) {
            return Err(format!("{check}: {w:e}"));
        }
        max = max.max(w);
    }
    Ok(format!("four residual families at {POINTS} points, worst {max:.2e}"))
}

fn c9_gamma_reduction() -> Verdict {
    let e1 = example("chen-cr");
    let im = immersion(&e1);
    let dom = e1.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max: f64 = 0.0;
    let mut draws = 0;
    while draws < 1000 {
        let x: Vec<f64> = (0..3).map(|k| rng.random_range(dom.lower[k]..dom.upper[k])).collect();
        if !dom.contains(&x) {
            continue;
        }
        let t = ineq::terms_at(im, &sff_at(im, &x)).map_err(|e| e.to_string())?;
        let c = rng.random_range(-4.0..4.0);
        let (n1, n2) = (rng.random_range(1..=6usize), rng.random_range(1..=6usize));
        let a = ineq::generalized_rhs(c, 0.0, n1, n2, &t);
        let b = 2.0 * ineq::csf_rhs(c, n1, n2, &t);
        let rel = (a - b).abs() / a.abs().max(1.0);
        if !(rel < 1e-12) {
            return Err(format!("c = {c}, n1 = {n1}, n2 = {n2} at {x:?}: {a} vs {b}"));
        }
        max = max.max(rel);
        draws += 1;
    }
    Ok(format!("{draws} draws, worst relative gap {max:.1e}"))
}

fn c10_oracle() -> Verdict {
    let mut max: f64 = 0.0;
    for name in ["chen-cr", "hyperbolic-warped", "s2-warped", "round-s2", "trivial-product", "perturbed-e1", "torus"] {
        let w = worst(&run(name, &[CheckGroup::Identities]), "oracle_concordance", runner::ORACLE_POINTS)?;
        if !(w < 1e-4) {
            return Err(format!("{name}: relative disagreement {w:e}"));
        }
        max = max.max(w);
    }
    Ok(format!("7 examples, {} points each, worst relative gap {max:.2e}", runner::ORACLE_POINTS))
}

fn c11_determinism() -> Verdict {
    let mut bytes = 0;
    for name in gallery::names() {
        let ex = example(name);
        let json = |threads| {
            let opts = RunOptions { threads, ..RunOptions::default() };
            runner::run(&ex, name, &opts).map(|r| r.to_json()).map_err(|e| e.to_string())
        };
        let first = json(None)?;
        if first != json(None)? || first != json(Some(1))? || first != json(Some(3))? {
            return Err(format!("{name}: reports differ between runs"));
        }
        bytes += first.len();
    }
    Ok(format!("{} examples, {bytes} bytes identical across repeated runs and thread counts", gallery::names().count()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("Gauss equation residual < 1e-7 at 64 points, under 30 s", c1_gauss),
        ("warped curvature identity residual < 1e-8", c2_warping_identity),
        ("scalar curvature decomposition residual < 1e-7", c3_scalar_decomposition),
        ("invariant leaf minimality", c4_dt_minimality),
        ("main inequality: equality, strictness, trivial case", c5_main_inequality),
        ("flat complex space form: lhs = rhs = 1/r^2", c6_csf_special_case),
        ("space-form models: constant phi-sections and K(X, xi)", c7_space_forms),
        ("standard Sasakian structure suite < 1e-8", c8_contact_suite),
        ("generalized bound at gamma = 0 is the complex space form bound", c9_gamma_reduction),
        ("jets agree with finite differences within 1e-4", c10_oracle),
        ("byte-identical reports", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {title} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {title} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
