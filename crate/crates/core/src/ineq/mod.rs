//! Pointwise identities and inequalities for warped product immersions.
//!
//! All Laplacians are the geometer's (`Δ = −div grad`) on the leaf metric,
//! and `‖h‖² = Σ (h^r_ij)²` over the adapted orthonormal frames.

use nalgebra::DVector;

use crate::error::GeomError;
use crate::jets::Point;
use crate::structures::{ModelTensors, SpaceFormModel};
use crate::subman::{ClassFlag, Immersion, SffData};
use crate::warped::{warping_terms, WarpedDecl, WarpingTerms};

fn decl_of(im: &Immersion) -> Result<&WarpedDecl, GeomError> {
    im.warped.as_ref().ok_or_else(|| GeomError::Config("a warped declaration is required".into()))
}

/// Warping terms of the declared `f` on the leaf of the induced metric.
pub fn terms_at(im: &Immersion, s: &SffData) -> Result<WarpingTerms, GeomError> {
    let x = Point::new(s.point.clone())?;
    warping_terms(&s.induced_jet, decl_of(im)?, &x)
}

/// `Σ_r Σ_{i<j ∈ block} (h^r_ii h^r_jj − (h^r_ij)²)`.
fn block_gauss_sum(s: &SffData, block: std::ops::Range<usize>) -> f64 {
    let mut total = 0.0;
    for hr in &s.h {
        for i in block.clone() {
            for j in block.clone().filter(|&j| j > i) {
                total += hr[(i, i)] * hr[(j, j)] - hr[(i, j)] * hr[(i, j)];
            }
        }
    }
    total
}

/// Both sides of the scalar curvature decomposition of a warped product:
/// `τ(T_xM) = n2 Δf/f + Σ_r(Σ_{a<b} … + Σ_{A<B} …) + τ̃(T_xN_1) + τ̃(T_xN_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDecomposition {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn scalar_decomposition(im: &Immersion, s: &SffData) -> Result<ScalarDecomposition, GeomError> {
    let decl = decl_of(im)?;
    let t = terms_at(im, s)?;
    let lhs = s.intrinsic.scalar_curvature()?;
    let rhs = decl.n2 as f64 * t.lap_f / t.f
        + block_gauss_sum(s, s.leaf())
        + block_gauss_sum(s, s.fiber())
        + s.ambient_tau(s.leaf(), s.leaf())
        + s.ambient_tau(s.fiber(), s.fiber());
    Ok(ScalarDecomposition { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// Instantiation of "`D_2`-minimal and fiber totally umbilical in the
/// ambient imply `h(D_2, D_2) = 0`" over a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2LemmaReport {
    pub d2_minimal_worst: f64,
    /// The fiber is umbilical in the ambient iff `h` is umbilical on `D_2`:
    /// its second fundamental form in `M` is `−g ∇ln f`, already umbilical.
    pub fiber_umbilical_worst: f64,
    pub conclusion_worst: f64,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
}

impl D2LemmaReport {
    /// `false` only when the hypotheses hold and the conclusion fails.
    pub fn implication_holds(&self) -> bool {
        !self.hypotheses_hold || self.conclusion_holds
    }
}

pub fn d2_lemma(data: &[SffData], tol: f64) -> Result<D2LemmaReport, GeomError> {
    let mut r = D2LemmaReport {
        d2_minimal_worst: 0.0,
        fiber_umbilical_worst: 0.0,
        conclusion_worst: 0.0,
        hypotheses_hold: false,
        conclusion_holds: false,
    };
    for s in data {
        let need = |f: ClassFlag| f.residual(s).ok_or_else(|| GeomError::Config("a warped declaration is required".into()));
        r.d2_minimal_worst = nan_max(r.d2_minimal_worst, need(ClassFlag::D2Minimal)?);
        r.fiber_umbilical_worst = nan_max(r.fiber_umbilical_worst, need(ClassFlag::D2TotallyUmbilical)?);
        r.conclusion_worst = nan_max(r.conclusion_worst, s.block_pair_max(s.fiber(), s.fiber()));
    }
    r.hypotheses_hold = r.d2_minimal_worst < tol && r.fiber_umbilical_worst < tol;
    r.conclusion_holds = r.conclusion_worst < tol;
    Ok(r)
}

/// `max ‖H_1‖` over the points, with `D_1` the declared leaf block.
pub fn dt_minimality(data: &[SffData]) -> f64 {
    data.iter().map(|s| s.partial_mean(s.leaf()).norm()).fold(0.0, nan_max)
}

pub(crate) fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Residuals of the conditions under which the main inequality is an equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualityDiagnostics {
    /// `max ‖h(D_T, D_T)‖`.
    pub leaf_leaf: f64,
    /// `max ‖h(D_⊥, D_⊥)‖`.
    pub fiber_fiber: f64,
    pub mean: f64,
    /// Leaf totally geodesic in the ambient (equals `leaf_leaf`, as leaves
    /// are totally geodesic in `M`).
    pub leaf_geodesic: f64,
    /// Fiber totally umbilical in the ambient.
    pub fiber_umbilical: f64,
}

impl EqualityDiagnostics {
    pub fn of(s: &SffData) -> Self {
        let leaf_leaf = s.block_pair_max(s.leaf(), s.leaf());
        Self {
            leaf_leaf,
            fiber_fiber: s.block_pair_max(s.fiber(), s.fiber()),
            mean: s.mean_norm(),
            leaf_geodesic: leaf_leaf,
            fiber_umbilical: s.umbilicity_residual(s.fiber(), &s.partial_mean(s.fiber())),
        }
    }

    /// Conditions (a), (b) and minimality.
    pub fn max(&self) -> f64 {
        nan_max(nan_max(self.leaf_leaf, self.fiber_fiber), self.mean)
    }
}

/// One evaluated inequality `lhs ≥ rhs` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityResult {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub diagnostics: Option<EqualityDiagnostics>,
    /// `slack ≥ −tol`.
    pub pass: bool,
    /// `|slack| < tol` and every diagnostic below `tol`.
    pub equality: bool,
}

impl InequalityResult {
    pub fn new(point: Vec<f64>, lhs: f64, rhs: f64, diagnostics: Option<EqualityDiagnostics>, tol: f64) -> Self {
        let slack = lhs - rhs;
        let pass = slack >= -tol;
        let equality = slack.abs() < tol && diagnostics.is_none_or(|d| d.max() < tol);
        Self { point, lhs, rhs, slack, diagnostics, pass, equality }
    }
}

/// Where the ambient curvature sums come from.
#[derive(Debug, Clone, Copy)]
pub enum AmbientCurvature<'a> {
    /// The ambient metric's own curvature tensor.
    Metric,
    /// A closed-form model evaluated with the ambient metric and structure
    /// at the image point.
    Model(&'a SpaceFormModel),
}

/// `τ̃(T_xM) − τ̃(T_xN_T) − τ̃(T_xN_⊥)`, i.e. the ambient sectional
/// curvatures of the mixed frame pairs.
pub fn ambient_tau_difference(s: &SffData, curvature: AmbientCurvature<'_>) -> Result<f64, GeomError> {
    match curvature {
        AmbientCurvature::Metric => Ok(s.ambient_tau(s.leaf(), s.fiber())),
        AmbientCurvature::Model(model) => {
            let tensors = model_tensors(s)?;
            model_mixed_sum(model, &tensors, &s.pushed[s.leaf()], &s.pushed[s.fiber()])
        }
    }
}

fn model_tensors(s: &SffData) -> Result<ModelTensors, GeomError> {
    let j = s.structure.clone().ok_or_else(|| GeomError::Config("a curvature model needs an ambient structure".into()))?;
    let g = s.normal.metric.clone();
    let eta = s.xi.as_ref().map(|xi| &g * xi);
    Ok(ModelTensors { g, j, xi: s.xi.clone(), eta })
}

/// `Σ_a Σ_A R(u_a, v_A, v_A, u_a)` for orthonormal `us`, `vs`.
pub fn model_mixed_sum(
    model: &SpaceFormModel,
    tensors: &ModelTensors,
    us: &[DVector<f64>],
    vs: &[DVector<f64>],
) -> Result<f64, GeomError> {
    let mut total = 0.0;
    for u in us {
        for v in vs {
            total += model.curvature(tensors, u, v, v, u)?;
        }
    }
    Ok(total)
}

/// `½‖h‖² ≥ τ̃(T_xM) − τ̃(T_xN_T) − τ̃(T_xN_⊥) − n2 Δf/f`.
pub fn theorem_main(
    im: &Immersion,
    s: &SffData,
    curvature: AmbientCurvature<'_>,
    tol: f64,
) -> Result<InequalityResult, GeomError> {
    let decl = decl_of(im)?;
    let t = terms_at(im, s)?;
    let lhs = 0.5 * s.norm_sq();
    let rhs = ambient_tau_difference(s, curvature)? - decl.n2 as f64 * t.lap_f / t.f;
    Ok(InequalityResult::new(s.point.clone(), lhs, rhs, Some(EqualityDiagnostics::of(s)), tol))
}

/// Closed form of the main inequality's slack, from the Gauss equation and
/// the scalar decomposition:
/// `½(n²‖H‖² + Σ_{a,b}‖h_ab‖² − ‖Σ_a h_aa‖² + Σ_{A,B}‖h_AB‖² − ‖Σ_A h_AA‖²)`.
pub fn slack_closed_form(s: &SffData) -> f64 {
    let n = s.sub_dim() as f64;
    let block = |b: std::ops::Range<usize>| {
        let mut sq = 0.0;
        for i in b.clone() {
            for j in b.clone() {
                sq += s.h_frame(i, j).norm_squared();
            }
        }
        let trace = s.partial_mean(b.clone()) * b.len() as f64;
        sq - trace.norm_squared()
    };
    0.5 * (n * n * s.mean.norm_squared() + block(s.leaf()) + block(s.fiber()))
}

/// `c n1 n2 / 4 + n2 ‖∇ln f‖² − n2 Δ ln f`: the main inequality's right side
/// in a complex space form of constant holomorphic curvature `c`.
pub fn csf_rhs(c: f64, n1: usize, n2: usize, t: &WarpingTerms) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    c * n1 * n2 / 4.0 + n2 * t.grad_ln_f_sq - n2 * t.lap_ln_f
}

/// The same bound with the `c`-term printed as `2 n1 n2 c / 4`.
pub fn csf_rhs_as_printed(c: f64, n1: usize, n2: usize, t: &WarpingTerms) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    2.0 * n1 * n2 * c / 4.0 + n2 * t.grad_ln_f_sq - n2 * t.lap_ln_f
}

/// `2 n2 (‖∇ln f‖² − Δ ln f + (c_s + 3)/2 · s + 1)`, bounding `‖h‖²`.
pub fn dp_rhs_as_printed(c_s: f64, s: f64, n2: usize, t: &WarpingTerms) -> f64 {
    2.0 * n2 as f64 * (t.grad_ln_f_sq - t.lap_ln_f + (c_s + 3.0) / 2.0 * s + 1.0)
}

/// `2 n2 (‖∇ln f‖² − Δ ln f + n1 (c + 3γ)/4)`, bounding `‖h‖²` in a
/// generalized complex space form.
pub fn generalized_rhs(c: f64, gamma: f64, n1: usize, n2: usize, t: &WarpingTerms) -> f64 {
    2.0 * n2 as f64 * (t.grad_ln_f_sq - t.lap_ln_f + n1 as f64 * (c + 3.0 * gamma) / 4.0)
}

/// `2 n2 ((c − 3)/2 · s − Δ ln f)`, bounding `‖h‖²` in a nearly Kähler ambient.
pub fn nearly_kaehler_rhs(c: f64, s: f64, n2: usize, t: &WarpingTerms) -> f64 {
    2.0 * n2 as f64 * ((c - 3.0) / 2.0 * s - t.lap_ln_f)
}

/// Complex space form bounds at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfBounds {
    /// `½‖h‖² ≥ csf_rhs`.
    pub bound: InequalityResult,
    /// `½‖h‖² ≥ csf_rhs_as_printed`; informational.
    pub as_printed: InequalityResult,
    /// `‖h‖² ≥ dp_rhs_as_printed`; informational.
    pub dp_as_printed: InequalityResult,
}

pub fn theorem_csf(im: &Immersion, s: &SffData, c: f64, dp_s: f64, tol: f64) -> Result<CsfBounds, GeomError> {
    let decl = decl_of(im)?;
    let t = terms_at(im, s)?;
    let half = 0.5 * s.norm_sq();
    let diag = Some(EqualityDiagnostics::of(s));
    let p = s.point.clone();
    Ok(CsfBounds {
        bound: InequalityResult::new(p.clone(), half, csf_rhs(c, decl.n1, decl.n2, &t), diag, tol),
        as_printed: InequalityResult::new(p.clone(), half, csf_rhs_as_printed(c, decl.n1, decl.n2, &t), diag, tol),
        dp_as_printed: InequalityResult::new(p, 2.0 * half, dp_rhs_as_printed(c, dp_s, decl.n2, &t), diag, tol),
    })
}

/// `‖h‖² ≥ generalized_rhs`.
pub fn theorem_generalized(im: &Immersion, s: &SffData, c: f64, gamma: f64, tol: f64) -> Result<InequalityResult, GeomError> {
    let decl = decl_of(im)?;
    let t = terms_at(im, s)?;
    let rhs = generalized_rhs(c, gamma, decl.n1, decl.n2, &t);
    Ok(InequalityResult::new(s.point.clone(), s.norm_sq(), rhs, Some(EqualityDiagnostics::of(s)), tol))
}

/// `‖h‖² ≥ nearly_kaehler_rhs`.
pub fn theorem_nearly_kaehler(im: &Immersion, s: &SffData, c: f64, dp_s: f64, tol: f64) -> Result<InequalityResult, GeomError> {
    let decl = decl_of(im)?;
    let t = terms_at(im, s)?;
    let rhs = nearly_kaehler_rhs(c, dp_s, decl.n2, &t);
    Ok(InequalityResult::new(s.point.clone(), s.norm_sq(), rhs, Some(EqualityDiagnostics::of(s)), tol))
}
