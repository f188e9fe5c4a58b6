//! Runs the checks of an example over a deterministic point sample and
//! assembles a [`Report`].
//!
//! Every run starts with a validation gate (rank of the immersion, positive
//! warping function, warped block form, CR gates, ambient structure
//! identities). When the gate fails, no other check is evaluated and the
//! verdict fails. Pointwise geometric failures after the gate become `NaN`
//! values in the affected record, which then fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{ConfigError, Example, ExpectKind, InequalityExpectation, Subject};
use crate::error::GeomError;
use crate::exprdsl::{eval_expr, eval_value, Expr};
use crate::ineq::{self, AmbientCurvature, InequalityResult};
use crate::jets::{default_step, fd_partial, Jet3, Point};
use crate::report::{CheckRecord, ConfigEcho, PointValue, Report, Worst};
use crate::riemann::{unit, MetricField, MetricSource, PointGeometry};
use crate::sampling::halton_points;
use crate::structures::{ComplexStructure, ContactClass, ContactStructure, SpaceFormKind, SpaceFormModel};
use crate::subman::{classify, Ambient, ClassFlag, Immersion, SffData};
use crate::warped::{block_form_residual, factor_geometry_residual, warping_identity, WarpedDecl};

/// Default tolerances by name. Every name may be overridden per example or
/// per run; all values must be finite and positive.
pub const DEFAULT_TOLERANCES: [(&str, f64); 15] = [
    ("classify", 1e-7),
    ("coefficient", 1e-10),
    ("cr", 1e-7),
    ("dt_minimality", 1e-8),
    ("duality", 1e-10),
    ("expected", 1e-8),
    ("gate", 1e-8),
    ("gauss", 1e-7),
    ("oracle", 1e-4),
    ("reduction", 1e-12),
    ("scalar_decomposition", 1e-7),
    ("scalar_identity", 1e-7),
    ("slack", 1e-8),
    ("structure", 1e-8),
    ("warping_identity", 1e-8),
];

/// Points at which derivatives are compared against finite differences.
pub const ORACLE_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { values: DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect() }
    }
}

impl Tolerances {
    pub fn check_override(name: &str, value: f64) -> Result<(), String> {
        if !DEFAULT_TOLERANCES.iter().any(|&(k, _)| k == name) {
            let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|&(k, _)| k).collect();
            return Err(format!("unknown tolerance `{name}` (known: {})", known.join(", ")));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance `{name}` must be finite and positive, got {value}"));
        }
        Ok(())
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        Self::check_override(name, value)?;
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    /// Panics on names outside [`DEFAULT_TOLERANCES`].
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckGroup {
    Structure,
    Identities,
    Classify,
    Inequalities,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 4] = [Self::Structure, Self::Identities, Self::Classify, Self::Inequalities];

    pub fn name(self) -> &'static str {
        match self {
            Self::Structure => "structure",
            Self::Identities => "identities",
            Self::Classify => "classify",
            Self::Inequalities => "inequalities",
        }
    }

    /// Parses a comma-separated list; `all` selects every group.
    pub fn parse_list(list: &str) -> Result<BTreeSet<CheckGroup>, String> {
        let mut out = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                out.extend(Self::ALL);
            } else {
                out.insert(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err("no check groups selected".into());
        }
        Ok(out)
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown check group `{s}` (use structure, identities, classify, inequalities or all)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub checks: BTreeSet<CheckGroup>,
    pub points: usize,
    pub seed: u64,
    /// Applied after the example's own overrides.
    pub tol_overrides: BTreeMap<String, f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { checks: CheckGroup::ALL.into_iter().collect(), points: 64, seed: 42, tol_overrides: BTreeMap::new(), threads: None }
    }
}

/// Effective tolerances of a run.
pub fn tolerances_for(example: &Example, opts: &RunOptions) -> Result<Tolerances, ConfigError> {
    let mut tol = Tolerances::default();
    for (k, v) in example.file.tolerances.iter().chain(&opts.tol_overrides) {
        tol.set(k, *v).map_err(ConfigError::Invalid)?;
    }
    Ok(tol)
}

/// Runs the selected checks. `target` is echoed verbatim in the report.
pub fn run(example: &Example, target: &str, opts: &RunOptions) -> Result<Report, ConfigError> {
    if opts.points == 0 {
        return Err(ConfigError::Invalid("at least one sample point is required".into()));
    }
    let tol = tolerances_for(example, opts)?;
    let points = halton_points(example.domain(), opts.points, opts.seed)?;
    let records = match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ConfigError::Invalid(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| records_for(example, &points, &tol, &opts.checks))
        }
        None => records_for(example, &points, &tol, &opts.checks),
    };
    let echo = ConfigEcho {
        target: target.to_string(),
        example: example.name().to_string(),
        checks: opts.checks.iter().map(|g| g.name().to_string()).collect(),
        points: opts.points,
        seed: opts.seed,
        tolerances: tol.as_map().clone(),
    };
    Ok(Report::new(echo, records))
}

fn records_for(example: &Example, points: &[Vec<f64>], tol: &Tolerances, checks: &BTreeSet<CheckGroup>) -> Vec<CheckRecord> {
    let ctx = Ctx { example, points, tol, checks };
    match &example.subject {
        Subject::Immersion(im) => ctx.immersion(im),
        Subject::Intrinsic { metric, decl } => ctx.intrinsic(metric, decl.as_ref()),
        Subject::Ambient(a) => ctx.ambient_only(a),
    }
}

const GATE: &str = "gate";
const STRUCTURE: &str = "structure";
const IDENTITIES: &str = "identities";
const CLASSIFY: &str = "classify";
const INEQUALITIES: &str = "inequalities";

fn pt(x: &[f64]) -> Result<Point, GeomError> {
    Ok(Point::new(x.to_vec())?)
}

fn pv(index: usize, point: &[f64], value: f64) -> PointValue {
    PointValue { index, point: point.to_vec(), value, lhs: None, rhs: None }
}

/// Evaluates `f` at every point in parallel, in point order. Errors become
/// `NaN`; the first one (by point index) is returned as a note.
fn pointwise<F>(points: &[Vec<f64>], f: F) -> (Vec<PointValue>, Option<String>)
where
    F: Fn(usize, &[f64]) -> Result<f64, GeomError> + Sync,
{
    let results: Vec<Result<f64, GeomError>> = points.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    let mut note = None;
    let values = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let v = r.unwrap_or_else(|e| {
                note.get_or_insert_with(|| format!("point #{i}: {e}"));
                f64::NAN
            });
            pv(i, &points[i], v)
        })
        .collect();
    (values, note)
}

fn attach(rec: CheckRecord, note: Option<String>) -> CheckRecord {
    match note {
        Some(n) => rec.with_note(n),
        None => rec,
    }
}

/// Relative error of an analytic derivative against a finite difference.
fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(1.0)
}

/// Every multi-index of order one and two over `n` variables.
fn multi_indices(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        for j in i..n {
            out.push(vec![i, j]);
        }
    }
    out
}

/// Worst relative disagreement between the jet of `e` at `x` and central
/// differences of its values, over first and second partials.
fn expr_oracle(e: &Expr, params: &[f64], x: &Point) -> Result<f64, GeomError> {
    let jet = eval_expr(e, x, params)?;
    let field = |y: &[f64]| eval_value(e, y, params).unwrap_or(f64::NAN);
    jet_oracle(&jet, &field, x.coords())
}

fn jet_oracle(jet: &Jet3, field: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64, GeomError> {
    let mut worst: f64 = 0.0;
    for mi in multi_indices(x.len()) {
        let fd = fd_partial(field, x, &mi, default_step(mi.len()), None)?;
        let analytic = jet.partial(&mi).unwrap_or(f64::NAN);
        worst = ineq::nan_max(worst, rel_err(analytic, fd));
    }
    Ok(worst)
}

/// Oracle over every entry of a metric field at `x`.
fn metric_oracle(metric: &MetricField, x: &Point) -> Result<f64, GeomError> {
    let mut worst: f64 = 0.0;
    for e in metric.entries() {
        worst = ineq::nan_max(worst, expr_oracle(e, metric.params(), x)?);
    }
    Ok(worst)
}

fn model_for(ambient: &Ambient, c: f64) -> Option<SpaceFormModel> {
    match ambient {
        Ambient::Complex(_) => Some(SpaceFormModel::new(SpaceFormKind::Complex, c)),
        _ => None,
    }
}

struct Ctx<'a> {
    example: &'a Example,
    points: &'a [Vec<f64>],
    tol: &'a Tolerances,
    checks: &'a BTreeSet<CheckGroup>,
}

impl Ctx<'_> {
    fn wants(&self, g: CheckGroup) -> bool {
        self.checks.contains(&g)
    }

    fn residual(&self, name: &str, group: &str, anchor: &str, tol_name: &str, f: impl Fn(usize, &[f64]) -> Result<f64, GeomError> + Sync) -> CheckRecord {
        let (values, note) = pointwise(self.points, f);
        attach(CheckRecord::new(name, group, anchor, Worst::Max, values).below(self.tol.get(tol_name)), note)
    }

    fn info(&self, name: &str, group: &str, anchor: &str, f: impl Fn(usize, &[f64]) -> Result<f64, GeomError> + Sync) -> CheckRecord {
        let (values, note) = pointwise(self.points, f);
        attach(CheckRecord::new(name, group, anchor, Worst::Max, values), note)
    }

    /// `|computed − expected|` for an expected-value expression.
    fn expected(&self, name: &str, anchor: &str, e: &Expr, computed: impl Fn(&[f64]) -> Result<f64, GeomError> + Sync) -> CheckRecord {
        let params = &self.example.file.params;
        self.residual(name, IDENTITIES, anchor, "expected", |_, x| {
            let want = eval_value(e, x, params)?;
            Ok((computed(x)? - want).abs())
        })
    }

    fn gate(&self, values: Vec<PointValue>, note: Option<String>) -> CheckRecord {
        let rec = CheckRecord::new(
            "validation_gate",
            GATE,
            "rank, positive warping function, block form, CR gates and ambient structure identities",
            Worst::Max,
            values,
        )
        .below(self.tol.get("gate"));
        attach(rec, note)
    }

    // ----- immersions -------------------------------------------------------

    fn immersion(&self, im: &Immersion) -> Vec<CheckRecord> {
        let computed: Vec<Result<SffData, GeomError>> =
            self.points.par_iter().map(|x| pt(x).and_then(|p| SffData::compute(im, &p))).collect();
        let (values, note) = pointwise(self.points, |i, _| {
            let s = computed[i].as_ref().map_err(Clone::clone)?;
            immersion_gate(im, s)
        });
        let gate = self.gate(values, note);
        let passed = gate.pass == Some(true);
        let mut out = vec![gate];
        if !passed {
            return out;
        }
        let data: Vec<SffData> = computed.into_iter().map(|r| r.expect("gate passed")).collect();
        if self.wants(CheckGroup::Structure) {
            out.extend(self.ambient_structure(&im.ambient, |i| data[i].image.clone()));
            if let Some(decl) = &im.warped {
                out.push(self.residual(
                    "induced_block_form",
                    STRUCTURE,
                    "induced metric is g1 + f² g2 in the declared blocks",
                    "gate",
                    |i, x| block_form_residual(&data[i].induced_jet, decl, &pt(x)?),
                ));
            }
        }
        if self.wants(CheckGroup::Identities) {
            out.extend(self.immersion_identities(im, &data));
        }
        if self.wants(CheckGroup::Classify) {
            out.extend(self.classification(&data));
        }
        if self.wants(CheckGroup::Inequalities) && im.warped.is_some() {
            out.extend(self.inequalities(im, &data));
        }
        out
    }

    fn immersion_identities(&self, im: &Immersion, data: &[SffData]) -> Vec<CheckRecord> {
        let mut out = vec![
            self.residual("gauss_equation", IDENTITIES, "R(X,Y,Z,W) = R̃(X,Y,Z,W) + g(h(X,W),h(Y,Z)) − g(h(X,Z),h(Y,W))", "gauss", |i, _| {
                Ok(data[i].gauss_residual_max())
            }),
            self.residual("scalar_identity", IDENTITIES, "2τ = 2τ̃(TM) + n²‖H‖² − ‖h‖²", "scalar_identity", |i, _| {
                data[i].scalar_identity_residual()
            }),
            self.residual("weingarten_duality", IDENTITIES, "g(A_ζ X, Y) = g(h(X,Y), ζ)", "duality", |i, _| data[i].duality_residual()),
            self.residual("sff_coefficients", IDENTITIES, "h is symmetric and normal-valued", "coefficient", |i, _| {
                Ok(data[i].coefficient_residual())
            }),
        ];
        if let Some(decl) = &im.warped {
            out.push(self.residual(
                "warping_identity",
                IDENTITIES,
                "Σ K(e_a ∧ e_A) = n2 Δf / f on the induced metric",
                "warping_identity",
                |_, x| Ok(warping_identity(im, decl, &pt(x)?)?.residual),
            ));
            out.push(self.residual(
                "scalar_decomposition",
                IDENTITIES,
                "τ = n2 Δf/f + block Gauss sums + τ̃(leaf) + τ̃(fiber)",
                "scalar_decomposition",
                |i, _| Ok(ineq::scalar_decomposition(im, &data[i])?.residual),
            ));
        }
        out.push(self.immersion_oracle(im, data));
        let ex = &self.example.expected;
        if let Some(e) = &ex.scalar_curvature {
            out.push(self.expected("expected_scalar_curvature", "scalar curvature of the induced metric", e, |x| {
                PointGeometry::at(im, &pt(x)?)?.scalar_curvature()
            }));
        }
        if let Some(e) = &ex.mean_norm {
            out.push(self.expected("expected_mean_norm", "‖H‖", e, |x| Ok(SffData::compute(im, &pt(x)?)?.mean_norm())));
        }
        if let Some(e) = &ex.norm_sq {
            out.push(self.expected("expected_norm_sq", "‖h‖²", e, |x| Ok(SffData::compute(im, &pt(x)?)?.norm_sq())));
        }
        if im.cr && matches!(im.ambient, Ambient::Contact(_)) {
            out.push(self.residual(
                "contact_cr_consequences",
                IDENTITIES,
                "h(X, ξ) = 0, g(h(D_T,D_T), φD_⊥) = 0 and h(X,Y) + h(φX,φY) ⊥ ν on the leaf",
                "cr",
                |i, _| Ok(data[i].cr_residuals(im)?.max()),
            ));
        }
        out
    }

    /// Jets against central differences on the first few points: the map,
    /// the ambient metric at the image, the induced metric and `f`.
    fn immersion_oracle(&self, im: &Immersion, _data: &[SffData]) -> CheckRecord {
        let k = self.points.len().min(ORACLE_POINTS);
        let sub = &self.points[..k];
        let (values, note) = pointwise(sub, |_, x| {
            let p = pt(x)?;
            let mut worst: f64 = 0.0;
            for e in im.map() {
                worst = ineq::nan_max(worst, expr_oracle(e, im.params(), &p)?);
            }
            let jets = im.map_jets(&p)?;
            worst = ineq::nan_max(worst, metric_oracle(im.ambient.metric(), &im.image(&jets)?)?);
            let mj = im.induced_jet(&p, &jets)?;
            let n = im.sub_dim();
            for a in 0..n {
                for b in a..n {
                    let field = |y: &[f64]| {
                        let q = match Point::new(y.to_vec()) {
                            Ok(q) => q,
                            Err(_) => return f64::NAN,
                        };
                        im.metric_jet(&q).map(|m| m.entry(a, b).value()).unwrap_or(f64::NAN)
                    };
                    worst = ineq::nan_max(worst, jet_oracle(mj.entry(a, b), &field, x)?);
                }
            }
            if let Some(decl) = &im.warped {
                worst = ineq::nan_max(worst, warping_oracle(decl, &p)?);
            }
            Ok(worst)
        });
        let rec = CheckRecord::new(
            "oracle_concordance",
            IDENTITIES,
            "first and second derivatives agree with central differences",
            Worst::Max,
            values,
        )
        .below(self.tol.get("oracle"));
        attach(rec, note)
    }

    fn classification(&self, data: &[SffData]) -> Vec<CheckRecord> {
        let c = classify(data, self.tol.get("classify"));
        let mut out = Vec::new();
        for outcome in &c.outcomes {
            let flag = outcome.flag;
            let values: Vec<PointValue> = match outcome.worst {
                Some(_) => data
                    .iter()
                    .enumerate()
                    .map(|(i, s)| pv(i, &self.points[i], flag.residual(s).unwrap_or(f64::NAN)))
                    .collect(),
                None => Vec::new(),
            };
            let mut rec = CheckRecord::new(flag.name(), CLASSIFY, flag_anchor(flag), Worst::Max, values);
            rec.tolerance = Some(c.tol);
            rec.holds = outcome.holds;
            match (outcome.holds, self.example.file.expect.flags.get(flag.name())) {
                (Some(h), Some(&want)) => rec.pass = Some(h == want),
                (None, Some(_)) => {
                    rec.pass = Some(false);
                    rec.note = Some("flag needs a warped declaration".into());
                }
                (None, None) => rec.note = Some("flag needs a warped declaration".into()),
                (Some(_), None) => {}
            }
            out.push(rec);
        }
        out.push(
            CheckRecord::new(
                "relative_null_space_dim",
                CLASSIFY,
                "dimension of {X : h(X, ·) = 0}",
                Worst::Max,
                data.iter().enumerate().map(|(i, s)| pv(i, &self.points[i], s.relative_null_space().len() as f64)).collect(),
            ),
        );
        out
    }

    fn inequalities(&self, im: &Immersion, data: &[SffData]) -> Vec<CheckRecord> {
        let decl = im.warped.as_ref().expect("caller checks the declaration");
        let expect = &self.example.file.expect;
        let model = &self.example.file.model;
        let slack_tol = self.tol.get("slack");
        let mut out = Vec::new();
        if im.cr {
            out.push(self.residual("dt_minimality", INEQUALITIES, "‖H_1‖ = 0 on the invariant leaf", "dt_minimality", |i, _| {
                Ok(data[i].partial_mean(data[i].leaf()).norm())
            }));
        }
        let lemma = ineq::d2_lemma(data, self.tol.get("classify"));
        let lemma_values: Vec<PointValue> =
            data.iter().enumerate().map(|(i, s)| pv(i, &self.points[i], s.block_pair_max(s.fiber(), s.fiber()))).collect();
        let mut rec = CheckRecord::new(
            "d2_lemma",
            INEQUALITIES,
            "D_2-minimal with umbilical fibers implies h(D_2, D_2) = 0",
            Worst::Max,
            lemma_values,
        );
        rec.tolerance = Some(self.tol.get("classify"));
        match lemma {
            Ok(r) => {
                rec.pass = Some(r.implication_holds());
                rec.holds = Some(r.hypotheses_hold);
                rec.note = Some(format!(
                    "hypotheses {}; conclusion {}",
                    if r.hypotheses_hold { "hold" } else { "do not hold" },
                    if r.conclusion_holds { "holds" } else { "does not hold" }
                ));
            }
            Err(e) => {
                rec.pass = Some(false);
                rec.note = Some(e.to_string());
            }
        }
        out.push(rec);

        if matches!(im.ambient, Ambient::Contact(_)) {
            return out;
        }
        let c = model.c.or_else(|| im.ambient.metric().is_constant().then_some(0.0));
        let model_curv = match (model.use_model_curvature, c) {
            (true, Some(c)) => model_for(&im.ambient, c),
            _ => None,
        };
        let curvature = match &model_curv {
            Some(m) => AmbientCurvature::Model(m),
            None => AmbientCurvature::Metric,
        };
        let main: Vec<Result<InequalityResult, GeomError>> =
            data.par_iter().map(|s| ineq::theorem_main(im, s, curvature, slack_tol)).collect();
        out.push(self.inequality(
            "theorem_main",
            "½‖h‖² ≥ τ̃(TM) − τ̃(TN_1) − τ̃(TN_2) − n2 Δf/f",
            &main,
            expect.theorem_main.as_ref(),
        ));
        if let Some(r) = self.inequality_expected("theorem_main_expected", &main, &self.example.expected.main_lhs, &self.example.expected.main_rhs) {
            out.push(r);
        }
        let slack_identity = self.residual(
            "theorem_main_slack_identity",
            INEQUALITIES,
            "slack = ½(n²‖H‖² + Σ‖h_ab‖² − ‖Σh_aa‖² + Σ‖h_AB‖² − ‖Σh_AA‖²)",
            "slack",
            |i, _| {
                let r = main[i].as_ref().map_err(Clone::clone)?;
                Ok((r.slack - ineq::slack_closed_form(&data[i])).abs())
            },
        );
        out.push(if model_curv.is_some() {
            slack_identity.with_pass(None).with_note("closed form assumes the metric's own curvature")
        } else {
            slack_identity
        });

        let Some(c) = c else { return out };
        let dp_s = model.dp_s.unwrap_or(decl.n1 as f64 / 2.0);
        let csf: Vec<Result<ineq::CsfBounds, GeomError>> =
            data.par_iter().map(|s| ineq::theorem_csf(im, s, c, dp_s, slack_tol)).collect();
        let pick = |f: fn(&ineq::CsfBounds) -> &InequalityResult| -> Vec<Result<InequalityResult, GeomError>> {
            csf.iter().map(|r| r.as_ref().map(|b| f(b).clone()).map_err(Clone::clone)).collect()
        };
        let bound = pick(|b| &b.bound);
        out.push(self.inequality(
            "theorem_csf",
            "½‖h‖² ≥ c n1 n2 / 4 + n2 ‖∇ln f‖² − n2 Δ ln f",
            &bound,
            expect.theorem_csf.as_ref(),
        ));
        if let Some(r) = self.inequality_expected("theorem_csf_expected", &bound, &self.example.expected.csf_lhs, &self.example.expected.csf_rhs) {
            out.push(r);
        }
        out.push(
            self.inequality("theorem_csf_as_printed", "½‖h‖² ≥ 2 n1 n2 c / 4 + n2 ‖∇ln f‖² − n2 Δ ln f", &pick(|b| &b.as_printed), None)
                .with_pass(None)
                .with_note("informational: the c-term doubled"),
        );
        out.push(
            self.inequality("theorem_dp_as_printed", "‖h‖² ≥ 2 n2 (‖∇ln f‖² − Δ ln f + (c + 3)/2 · s + 1)", &pick(|b| &b.dp_as_printed), None)
                .with_pass(None)
                .with_note(format!("informational, s = {}", crate::report::num(dp_s))),
        );

        let gamma = model.gamma.unwrap_or(0.0);
        let generalized: Vec<Result<InequalityResult, GeomError>> =
            data.par_iter().map(|s| ineq::theorem_generalized(im, s, c, gamma, slack_tol)).collect();
        out.push(self.inequality(
            "theorem_generalized",
            "‖h‖² ≥ 2 n2 (‖∇ln f‖² − Δ ln f + n1 (c + 3γ)/4)",
            &generalized,
            expect.theorem_generalized.as_ref(),
        ));
        out.push(self.residual(
            "generalized_reduction",
            INEQUALITIES,
            "at γ = 0 the generalized bound is twice the complex space form bound",
            "reduction",
            |i, _| {
                let t = ineq::terms_at(im, &data[i])?;
                let a = ineq::generalized_rhs(c, 0.0, decl.n1, decl.n2, &t);
                let b = 2.0 * ineq::csf_rhs(c, decl.n1, decl.n2, &t);
                Ok((a - b).abs() / a.abs().max(1.0))
            },
        ));
        if let Some(nk) = model.nearly_kaehler_c {
            let r: Vec<Result<InequalityResult, GeomError>> =
                data.par_iter().map(|s| ineq::theorem_nearly_kaehler(im, s, nk, dp_s, slack_tol)).collect();
            out.push(
                self.inequality("nearly_kaehler", "‖h‖² ≥ 2 n2 ((c − 3)/2 · s − Δ ln f)", &r, None)
                    .with_pass(None)
                    .with_note("informational: needs a nearly Kähler ambient"),
            );
        }
        out
    }

    /// Slack record of an inequality; the worst value is the smallest slack.
    fn inequality(
        &self,
        name: &str,
        anchor: &str,
        results: &[Result<InequalityResult, GeomError>],
        expect: Option<&InequalityExpectation>,
    ) -> CheckRecord {
        let mut note = None;
        let mut all_hold = true;
        let mut all_equal = true;
        let mut min_slack = f64::INFINITY;
        let values = results
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                Ok(r) => {
                    all_hold &= r.pass;
                    all_equal &= r.equality;
                    min_slack = if r.slack.is_nan() { f64::NAN } else { min_slack.min(r.slack) };
                    PointValue { index: i, point: self.points[i].clone(), value: r.slack, lhs: Some(r.lhs), rhs: Some(r.rhs) }
                }
                Err(e) => {
                    all_hold = false;
                    all_equal = false;
                    note.get_or_insert_with(|| format!("point #{i}: {e}"));
                    pv(i, &self.points[i], f64::NAN)
                }
            })
            .collect();
        let mut rec = CheckRecord::new(name, INEQUALITIES, anchor, Worst::Min, values);
        rec.tolerance = Some(self.tol.get("slack"));
        rec.holds = Some(all_hold);
        rec.equality = Some(all_equal);
        rec.pass = Some(match expect.map(|e| (e.kind, e.margin)) {
            None | Some((ExpectKind::Holds, _)) => all_hold,
            Some((ExpectKind::Equality, _)) => all_hold && all_equal,
            Some((ExpectKind::Strict, margin)) => min_slack > margin.unwrap_or(0.0),
        });
        attach(rec, note)
    }

    /// `max(|lhs − expected lhs|, |rhs − expected rhs|)` when either side has
    /// an expected expression.
    fn inequality_expected(
        &self,
        name: &str,
        results: &[Result<InequalityResult, GeomError>],
        lhs: &Option<Expr>,
        rhs: &Option<Expr>,
    ) -> Option<CheckRecord> {
        if lhs.is_none() && rhs.is_none() {
            return None;
        }
        let params = &self.example.file.params;
        Some(self.residual(name, INEQUALITIES, "both sides match their expected closed forms", "expected", |i, x| {
            let r = results[i].as_ref().map_err(Clone::clone)?;
            let mut worst: f64 = 0.0;
            if let Some(e) = lhs {
                worst = ineq::nan_max(worst, (r.lhs - eval_value(e, x, params)?).abs());
            }
            if let Some(e) = rhs {
                worst = ineq::nan_max(worst, (r.rhs - eval_value(e, x, params)?).abs());
            }
            Ok(worst)
        }))
    }

    // ----- ambient structures ----------------------------------------------

    /// Structure identities at ambient points `at(i)`.
    fn ambient_structure(&self, ambient: &Ambient, at: impl Fn(usize) -> Vec<f64> + Sync) -> Vec<CheckRecord> {
        let expected_class = self.example.file.expect.contact_class.as_deref().and_then(ContactClass::from_name);
        match ambient {
            Ambient::Plain(_) => Vec::new(),
            Ambient::Complex(cs) => vec![self.residual(
                "complex_structure",
                STRUCTURE,
                "J² = −I, g(J·,J·) = g and ∇J = 0",
                "structure",
                |i, _| Ok(cs.residuals(&pt(&at(i))?)?.max()),
            )],
            Ambient::Contact(cs) => {
                let mut out = vec![self.residual(
                    "almost_contact",
                    STRUCTURE,
                    "φ² = −I + η⊗ξ, φξ = 0, η∘φ = 0, η(ξ) = 1 and g(φ·,φ·) = g − η⊗η",
                    "structure",
                    |i, _| Ok(cs.at(&pt(&at(i))?)?.almost_contact_residuals().max()),
                )];
                if let Some(class) = expected_class {
                    out.push(self.residual(
                        "contact_class",
                        STRUCTURE,
                        "(∇_X φ)Y matches the expected class",
                        "structure",
                        |i, _| Ok(cs.at(&pt(&at(i))?)?.max_over_basis(|c, x, y| c.class_residual(class, x, y))),
                    ));
                }
                let required = expected_class == Some(ContactClass::Sasakian);
                let normality = self.info("normality", STRUCTURE, "[φ,φ] + 2 dη ⊗ ξ = 0", |i, _| {
                    Ok(cs.at(&pt(&at(i))?)?.max_over_basis(|c, x, y| c.normality_residual(x, y)))
                });
                let contact_metric = self.info("contact_metric", STRUCTURE, "g(φX, Y) = dη(X, Y)", |i, _| {
                    Ok(cs.at(&pt(&at(i))?)?.max_over_basis(|c, x, y| c.contact_metric_residual(x, y)))
                });
                for rec in [normality, contact_metric] {
                    out.push(if required { rec.below(self.tol.get("structure")) } else { rec });
                }
                out
            }
        }
    }

    fn ambient_only(&self, ambient: &Ambient) -> Vec<CheckRecord> {
        let (values, note) = pointwise(self.points, |_, x| {
            let p = pt(x)?;
            PointGeometry::at(ambient.metric(), &p)?;
            ambient_gate(ambient, &p)
        });
        let gate = self.gate(values, note);
        let passed = gate.pass == Some(true);
        let mut out = vec![gate];
        if !passed {
            return out;
        }
        if self.wants(CheckGroup::Structure) {
            out.extend(self.ambient_structure(ambient, |i| self.points[i].clone()));
        }
        if self.wants(CheckGroup::Identities) {
            out.push(self.residual("curvature_symmetries", IDENTITIES, "R_ijkl = −R_jikl = R_klij and the first Bianchi identity", "gauss", |_, x| {
                Ok(PointGeometry::at(ambient.metric(), &pt(x)?)?.symmetry_residual())
            }));
            out.push(self.metric_oracle_record(ambient.metric(), None));
        }
        out
    }

    // ----- intrinsic metrics ------------------------------------------------

    fn intrinsic(&self, metric: &MetricField, decl: Option<&WarpedDecl>) -> Vec<CheckRecord> {
        let (values, note) = pointwise(self.points, |_, x| {
            let p = pt(x)?;
            PointGeometry::at(metric, &p)?;
            match decl {
                Some(d) => {
                    d.f_jet(&p)?;
                    block_form_residual(&metric.metric_jet(&p)?, d, &p)
                }
                None => Ok(0.0),
            }
        });
        let gate = self.gate(values, note);
        let passed = gate.pass == Some(true);
        let mut out = vec![gate];
        if !passed {
            return out;
        }
        if self.wants(CheckGroup::Structure) {
            if let Some(d) = decl {
                out.push(self.residual("block_form", STRUCTURE, "metric is g1 + f² g2 in the declared blocks", "gate", |_, x| {
                    let p = pt(x)?;
                    block_form_residual(&metric.metric_jet(&p)?, d, &p)
                }));
            }
        }
        if self.wants(CheckGroup::Identities) {
            out.push(self.residual("curvature_symmetries", IDENTITIES, "R_ijkl = −R_jikl = R_klij and the first Bianchi identity", "gauss", |_, x| {
                Ok(PointGeometry::at(metric, &pt(x)?)?.symmetry_residual())
            }));
            if let Some(d) = decl {
                out.push(self.residual(
                    "factor_geometry",
                    IDENTITIES,
                    "leaves totally geodesic, fibers with second fundamental form −g ∇ln f",
                    "warping_identity",
                    |_, x| {
                        let p = pt(x)?;
                        factor_geometry_residual(&PointGeometry::at(metric, &p)?, d, &p)
                    },
                ));
                out.push(self.residual(
                    "warping_identity",
                    IDENTITIES,
                    "Σ K(e_a ∧ e_A) = n2 Δf / f",
                    "warping_identity",
                    |_, x| Ok(warping_identity(metric, d, &pt(x)?)?.residual),
                ));
            }
            if let Some(e) = &self.example.expected.sectional {
                let n = metric.dim();
                out.push(self.expected("expected_sectional", "sectional curvature of every coordinate plane", e, |x| {
                    let geo = PointGeometry::at(metric, &pt(x)?)?;
                    let mut worst: f64 = 0.0;
                    let want = eval_value(e, x, &self.example.file.params)?;
                    let mut at_worst = want;
                    for i in 0..n {
                        for j in i + 1..n {
                            let k = geo.sectional(&unit(n, i), &unit(n, j))?;
                            if !((k - want).abs() <= worst) {
                                worst = (k - want).abs();
                                at_worst = k;
                            }
                        }
                    }
                    Ok(at_worst)
                }));
            }
            out.push(self.metric_oracle_record(metric, decl));
        }
        out
    }

    fn metric_oracle_record(&self, metric: &MetricField, decl: Option<&WarpedDecl>) -> CheckRecord {
        let sub = &self.points[..self.points.len().min(ORACLE_POINTS)];
        let (values, note) = pointwise(sub, |_, x| {
            let p = pt(x)?;
            let mut worst = metric_oracle(metric, &p)?;
            if let Some(d) = decl {
                worst = ineq::nan_max(worst, warping_oracle(d, &p)?);
            }
            Ok(worst)
        });
        let rec = CheckRecord::new(
            "oracle_concordance",
            IDENTITIES,
            "first and second derivatives agree with central differences",
            Worst::Max,
            values,
        )
        .below(self.tol.get("oracle"));
        attach(rec, note)
    }
}

fn warping_oracle(decl: &WarpedDecl, p: &Point) -> Result<f64, GeomError> {
    let jet = decl.f_jet(p)?;
    let field = |y: &[f64]| Point::new(y.to_vec()).ok().and_then(|q| decl.f_jet(&q).ok()).map_or(f64::NAN, |j| j.value());
    jet_oracle(&jet, &field, p.coords())
}

/// Pointwise gate of an immersion; zero when every precondition holds.
fn immersion_gate(im: &Immersion, s: &SffData) -> Result<f64, GeomError> {
    let x = pt(&s.point)?;
    let mut worst = ambient_gate(&im.ambient, &pt(&s.image)?)?;
    if let Some(decl) = &im.warped {
        decl.f_jet(&x)?;
        worst = ineq::nan_max(worst, block_form_residual(&s.induced_jet, decl, &x)?);
    }
    if im.cr {
        worst = ineq::nan_max(worst, s.cr_gate(im)?.max());
    }
    Ok(worst)
}

/// Algebraic identities of the ambient structure (not its parallelism).
fn ambient_gate(ambient: &Ambient, y: &Point) -> Result<f64, GeomError> {
    Ok(match ambient {
        Ambient::Plain(_) => 0.0,
        Ambient::Complex(cs) => complex_algebraic(cs, y)?,
        Ambient::Contact(cs) => contact_algebraic(cs, y)?,
    })
}

fn complex_algebraic(cs: &ComplexStructure, y: &Point) -> Result<f64, GeomError> {
    let r = cs.residuals(y)?;
    Ok(r.square.max(r.compatibility))
}

fn contact_algebraic(cs: &ContactStructure, y: &Point) -> Result<f64, GeomError> {
    Ok(cs.at(y)?.almost_contact_residuals().max())
}

fn flag_anchor(flag: ClassFlag) -> &'static str {
    match flag {
        ClassFlag::TotallyGeodesic => "h = 0",
        ClassFlag::TotallyUmbilical => "h(X,Y) = g(X,Y) H",
        ClassFlag::Minimal => "H = 0",
        ClassFlag::MixedTotallyGeodesic => "h(D_1, D_2) = 0",
        ClassFlag::D1TotallyGeodesic => "h(D_1, D_1) = 0",
        ClassFlag::D1Minimal => "trace of h on D_1 vanishes",
        ClassFlag::D2Minimal => "trace of h on D_2 vanishes",
        ClassFlag::D2TotallyUmbilical => "h(Z,W) = g(Z,W) H_2 on D_2",
    }
}
