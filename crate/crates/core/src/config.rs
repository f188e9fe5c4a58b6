//! Example files: a TOML document declaring what to check and where.
//!
//! ```toml
//! name = "rotating-plane"
//! params = []                      # values of p1, p2, ... (optional)
//!
//! [ambient]                        # required for immersions
//! preset = "flat-complex"          # "flat", "flat-complex" or "sasakian-r5"
//! dim = 4                          # ambient chart dimension for flat presets
//! # or: metric = [["1", "0"], ["0", "x1^2"]] with optional j / phi, xi, eta
//!
//! [immersion]                      # an immersed submanifold ...
//! dim = 3
//! map = ["x1*cos(x3)", "x2*cos(x3)", "x1*sin(x3)", "x2*sin(x3)"]
//!
//! # [metric]                       # ... or an intrinsic metric
//! # rows = [["1", "0"], ["0", "exp(2*x1)"]]
//!
//! [warped]                         # optional block declaration
//! n1 = 2
//! n2 = 1
//! f = "sqrt(x1^2+x2^2)"
//! cr = true                        # leaf invariant, fiber anti-invariant
//!
//! [domain]
//! lower = [-2.2, -2.2, 0.1]
//! upper = [2.2, 2.2, 1.4]
//! exclude = [{ axes = [0, 1], center = [0.0, 0.0], radius = 0.1 }]
//!
//! [model]                          # constants for the space-form bounds
//! c = 0.0
//!
//! [tolerances]                     # per-example overrides
//! slack = 1e-8
//!
//! [expect]
//! flags = { minimal = true }
//! theorem_main = { kind = "equality", lhs = "1/(x1^2+x2^2)" }
//! basis = "why the expected values are what they are"
//! ```
//!
//! Expressions use the crate's expression language with variables
//! `x1..xn` of the chart they live on and parameters `p1..pk`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeomError;
use crate::exprdsl::{parse, Expr, ParseError};
use crate::jets::{DomainBox, JetError};
use crate::riemann::{MetricField, MetricSource};
use crate::structures::{ComplexStructure, ContactStructure, ExprMatrix};
use crate::subman::{Ambient, Immersion};
use crate::warped::WarpedDecl;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Toml(String),
    #[error("in `{field}`: {source}")]
    Expr { field: String, source: ParseError },
    #[error("in `{field}`: {source}")]
    Geom { field: String, source: GeomError },
    #[error("invalid domain: {0}")]
    Domain(#[from] JetError),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown built-in example `{0}`")]
    UnknownBuiltin(String),
    #[error("`{target}` is neither a built-in example nor an existing file (built-ins: {builtins})")]
    UnknownTarget { target: String, builtins: String },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub ambient: Option<AmbientSpec>,
    pub immersion: Option<ImmersionSpec>,
    pub metric: Option<MetricSpec>,
    pub warped: Option<WarpedSpec>,
    pub domain: DomainBox,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub preset: Option<String>,
    pub dim: Option<usize>,
    pub metric: Option<Vec<Vec<String>>>,
    pub j: Option<Vec<Vec<String>>>,
    pub phi: Option<Vec<Vec<String>>>,
    pub xi: Option<Vec<String>>,
    pub eta: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub dim: usize,
    pub map: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedSpec {
    pub n1: usize,
    pub n2: usize,
    pub f: String,
    #[serde(default)]
    pub cr: bool,
}

/// Constants of the closed-form bounds. `c` defaults to 0 on flat
/// ambients; `dp_s` is the free `s` of the as-printed bounds (default
/// `n1 / 2`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub dp_s: Option<f64>,
    pub nearly_kaehler_c: Option<f64>,
    /// Take the ambient curvature of the main inequality from the complex
    /// space-form model with constant `c` instead of the metric.
    #[serde(default)]
    pub use_model_curvature: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectKind {
    /// The inequality holds at every point.
    Holds,
    /// Equality (with vanishing diagnostics) at every point.
    Equality,
    /// `slack > margin` at every point.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityExpectation {
    pub kind: ExpectKind,
    pub margin: Option<f64>,
    /// Expected left side as an expression in the sub-chart variables.
    pub lhs: Option<String>,
    pub rhs: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub flags: BTreeMap<String, bool>,
    pub theorem_main: Option<InequalityExpectation>,
    pub theorem_csf: Option<InequalityExpectation>,
    pub theorem_generalized: Option<InequalityExpectation>,
    /// Sectional curvature of every coordinate plane (intrinsic metrics) or
    /// scalar curvature (immersions), as expressions.
    pub sectional: Option<String>,
    pub scalar_curvature: Option<String>,
    pub mean_norm: Option<String>,
    pub norm_sq: Option<String>,
    /// Expected class of a contact ambient (`sasakian`, `kenmotsu`,
    /// `cosymplectic` or `nearly_cosymplectic`).
    pub contact_class: Option<String>,
    #[serde(default)]
    pub basis: String,
}

/// What an example is about.
#[derive(Debug, Clone)]
pub enum Subject {
    Immersion(Immersion),
    Intrinsic { metric: MetricField, decl: Option<WarpedDecl> },
    /// Only the ambient structure itself is checked.
    Ambient(Ambient),
}

/// Parsed expectation expressions over the sampled chart.
#[derive(Debug, Clone, Default)]
pub struct ExpectedExprs {
    pub sectional: Option<Expr>,
    pub scalar_curvature: Option<Expr>,
    pub mean_norm: Option<Expr>,
    pub norm_sq: Option<Expr>,
    pub main_lhs: Option<Expr>,
    pub main_rhs: Option<Expr>,
    pub csf_lhs: Option<Expr>,
    pub csf_rhs: Option<Expr>,
}

/// A fully built example.
#[derive(Debug, Clone)]
pub struct Example {
    pub file: ExampleFile,
    pub subject: Subject,
    pub expected: ExpectedExprs,
}

impl Example {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn domain(&self) -> &DomainBox {
        &self.file.domain
    }

    /// Dimension of the sampled chart.
    pub fn chart_dim(&self) -> usize {
        match &self.subject {
            Subject::Immersion(im) => im.sub_dim(),
            Subject::Intrinsic { metric, .. } => metric.dim(),
            Subject::Ambient(a) => a.dim(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ExampleFile = toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))?;
        Self::build(file)
    }

    pub fn build(file: ExampleFile) -> Result<Self, ConfigError> {
        let params = file.params.clone();
        let np = params.len();
        let subject = match (&file.immersion, &file.metric) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid("declare either [immersion] or [metric], not both".into()));
            }
            (Some(spec), None) => {
                let ambient = build_ambient(file.ambient.as_ref(), &params)?;
                let map = spec
                    .map
                    .iter()
                    .enumerate()
                    .map(|(i, s)| expr(&format!("immersion.map[{i}]"), s, spec.dim, np))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut im = Immersion::new(spec.dim, map, params.clone(), ambient).map_err(geom("immersion"))?;
                if let Some(w) = &file.warped {
                    im = im.with_warped(warped_decl(w, spec.dim, &params)?).map_err(geom("warped"))?;
                    if w.cr {
                        im = im.with_cr().map_err(geom("warped.cr"))?;
                    }
                }
                Subject::Immersion(im)
            }
            (None, Some(spec)) => {
                let dim = spec.rows.len();
                let rows = parse_rows("metric.rows", &spec.rows, dim, np)?;
                let metric = MetricField::new(rows, params.clone()).map_err(geom("metric"))?;
                let decl = match &file.warped {
                    Some(w) if w.cr => {
                        return Err(ConfigError::Invalid("a CR declaration needs an immersion".into()));
                    }
                    Some(w) => Some(warped_decl(w, dim, &params)?),
                    None => None,
                };
                Subject::Intrinsic { metric, decl }
            }
            (None, None) => {
                if file.warped.is_some() {
                    return Err(ConfigError::Invalid("[warped] needs an [immersion] or a [metric]".into()));
                }
                Subject::Ambient(build_ambient(file.ambient.as_ref(), &params)?)
            }
        };
        let example = Self { file, subject, expected: ExpectedExprs::default() };
        let dim = example.chart_dim();
        if example.file.domain.dim() != dim {
            return Err(ConfigError::Invalid(format!(
                "domain has {} axes but the sampled chart has dimension {dim}",
                example.file.domain.dim()
            )));
        }
        example.file.domain.validate()?;
        for (name, v) in &example.file.tolerances {
            crate::runner::Tolerances::check_override(name, *v).map_err(ConfigError::Invalid)?;
        }
        for name in example.file.expect.flags.keys() {
            if !crate::subman::ClassFlag::ALL.iter().any(|f| f.name() == name) {
                return Err(ConfigError::Invalid(format!("unknown classification flag `{name}`")));
            }
        }
        let e = &example.file.expect;
        if let Some(class) = &e.contact_class {
            if crate::structures::ContactClass::from_name(class).is_none() {
                return Err(ConfigError::Invalid(format!("unknown contact class `{class}`")));
            }
        }
        let opt = |field: &str, s: &Option<String>| s.as_ref().map(|s| expr(field, s, dim, np)).transpose();
        let expected = ExpectedExprs {
            sectional: opt("expect.sectional", &e.sectional)?,
            scalar_curvature: opt("expect.scalar_curvature", &e.scalar_curvature)?,
            mean_norm: opt("expect.mean_norm", &e.mean_norm)?,
            norm_sq: opt("expect.norm_sq", &e.norm_sq)?,
            main_lhs: opt("expect.theorem_main.lhs", &e.theorem_main.as_ref().and_then(|x| x.lhs.clone()))?,
            main_rhs: opt("expect.theorem_main.rhs", &e.theorem_main.as_ref().and_then(|x| x.rhs.clone()))?,
            csf_lhs: opt("expect.theorem_csf.lhs", &e.theorem_csf.as_ref().and_then(|x| x.lhs.clone()))?,
            csf_rhs: opt("expect.theorem_csf.rhs", &e.theorem_csf.as_ref().and_then(|x| x.rhs.clone()))?,
        };
        Ok(Self { expected, ..example })
    }
}

fn geom(field: &'static str) -> impl Fn(GeomError) -> ConfigError {
    move |source| match source {
        GeomError::Parse(p) => ConfigError::Expr { field: field.to_string(), source: p },
        source => ConfigError::Geom { field: field.to_string(), source },
    }
}

fn expr(field: &str, text: &str, dim: usize, n_params: usize) -> Result<Expr, ConfigError> {
    parse(text, dim, n_params).map_err(|source| ConfigError::Expr { field: field.to_string(), source })
}

fn parse_rows(field: &str, rows: &[Vec<String>], dim: usize, np: usize) -> Result<Vec<Vec<Expr>>, ConfigError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, s)| expr(&format!("{field}[{i}][{j}]"), s, dim, np)).collect()
        })
        .collect()
}

fn warped_decl(w: &WarpedSpec, dim: usize, params: &[f64]) -> Result<WarpedDecl, ConfigError> {
    if w.n1 + w.n2 != dim {
        return Err(ConfigError::Invalid(format!("warped blocks {} + {} do not add up to {dim}", w.n1, w.n2)));
    }
    let f = expr("warped.f", &w.f, dim, params.len())?;
    WarpedDecl::new(w.n1, w.n2, f, params.to_vec()).map_err(geom("warped"))
}

fn build_ambient(spec: Option<&AmbientSpec>, params: &[f64]) -> Result<Ambient, ConfigError> {
    let spec = spec.ok_or_else(|| ConfigError::Invalid("missing [ambient] section".into()))?;
    let np = params.len();
    let explicit = spec.metric.is_some() || spec.j.is_some() || spec.phi.is_some() || spec.xi.is_some() || spec.eta.is_some();
    if let Some(preset) = &spec.preset {
        if explicit {
            return Err(ConfigError::Invalid("an ambient preset excludes explicit tensors".into()));
        }
        return match preset.as_str() {
            "flat" => Ok(Ambient::Plain(MetricField::flat(preset_dim(spec)?))),
            "flat-complex" => {
                let m = preset_dim(spec)?;
                if m % 2 != 0 {
                    return Err(ConfigError::Invalid(format!("flat-complex needs an even dimension, got {m}")));
                }
                Ok(Ambient::Complex(ComplexStructure::flat(m / 2)))
            }
            "sasakian-r5" => match spec.dim {
                None | Some(5) => Ok(Ambient::Contact(ContactStructure::standard_sasakian())),
                Some(d) => Err(ConfigError::Invalid(format!("sasakian-r5 has dimension 5, not {d}"))),
            },
            other => Err(ConfigError::Invalid(format!("unknown ambient preset `{other}`"))),
        };
    }
    let rows = spec.metric.as_ref().ok_or_else(|| ConfigError::Invalid("ambient needs a preset or a metric".into()))?;
    let m = rows.len();
    if spec.dim.is_some_and(|d| d != m) {
        return Err(ConfigError::Invalid("ambient dim disagrees with the metric".into()));
    }
    let metric = MetricField::new(parse_rows("ambient.metric", rows, m, np)?, params.to_vec()).map_err(geom("ambient.metric"))?;
    let matrix = |field: &'static str, rows: &[Vec<String>]| {
        ExprMatrix::parse(rows, m, params.to_vec()).map_err(geom(field))
    };
    match (&spec.j, &spec.phi, &spec.xi, &spec.eta) {
        (None, None, None, None) => Ok(Ambient::Plain(metric)),
        (Some(j), None, None, None) => {
            Ok(Ambient::Complex(ComplexStructure::new(metric, matrix("ambient.j", j)?).map_err(geom("ambient.j"))?))
        }
        (None, Some(phi), Some(xi), Some(eta)) => {
            let phi = matrix("ambient.phi", phi)?;
            let xi = ExprMatrix::parse_column(xi, m, params.to_vec()).map_err(geom("ambient.xi"))?;
            let eta = ExprMatrix::parse(std::slice::from_ref(eta), m, params.to_vec()).map_err(geom("ambient.eta"))?;
            Ok(Ambient::Contact(ContactStructure::new(metric, phi, xi, eta).map_err(geom("ambient"))?))
        }
        _ => Err(ConfigError::Invalid("ambient structure needs either j, or all of phi, xi and eta".into())),
    }
}

fn preset_dim(spec: &AmbientSpec) -> Result<usize, ConfigError> {
    spec.dim.filter(|&d| d > 0).ok_or_else(|| ConfigError::Invalid("flat ambient presets need a positive dim".into()))
}
