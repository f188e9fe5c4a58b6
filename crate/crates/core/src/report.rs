//! Check reports and their JSON and text renderings.
//!
//! Every floating-point number is written with 17 significant digits
//! (`{:.16e}`) in both renderings, so text and JSON carry identical values
//! and reparsing either reproduces the computed bits. Non-finite numbers
//! become `null` in JSON and `NaN`/`inf` in text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

/// Value of one check at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rhs: Option<f64>,
}

/// Whether larger or smaller values are worse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Worst {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub group: String,
    /// The identity or statement being checked.
    pub anchor: String,
    pub worst_is: Worst,
    pub values: Vec<PointValue>,
    pub worst: f64,
    pub tolerance: Option<f64>,
    /// `None` for informational records, which never affect the verdict.
    pub pass: Option<bool>,
    /// Whether the checked statement itself held (flags and inequalities),
    /// as opposed to whether it matched the expectation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equality: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Builds a record and takes its worst value over `values` (NaN wins).
    pub fn new(name: &str, group: &str, anchor: &str, worst_is: Worst, values: Vec<PointValue>) -> Self {
        let worst = values.iter().map(|v| v.value).fold(
            match worst_is {
                Worst::Max => f64::NEG_INFINITY,
                Worst::Min => f64::INFINITY,
            },
            |acc, v| {
                if acc.is_nan() || v.is_nan() {
                    f64::NAN
                } else if worst_is == Worst::Max {
                    acc.max(v)
                } else {
                    acc.min(v)
                }
            },
        );
        Self {
            name: name.to_string(),
            group: group.to_string(),
            anchor: anchor.to_string(),
            worst_is,
            values,
            worst,
            tolerance: None,
            pass: None,
            holds: None,
            equality: None,
            note: None,
        }
    }

    /// Residual below `tol` at every point.
    pub fn below(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self.pass = Some(self.worst < tol);
        self
    }

    pub fn with_pass(mut self, pass: Option<bool>) -> Self {
        self.pass = pass;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub target: String,
    pub example: String,
    pub checks: Vec<String>,
    pub points: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRecord>,
    pub verdict: Verdict,
}

impl Report {
    /// The verdict fails iff some record fails.
    pub fn new(config: ConfigEcho, checks: Vec<CheckRecord>) -> Self {
        let verdict = if checks.iter().any(|c| c.pass == Some(false)) { Verdict::Fail } else { Verdict::Pass };
        Self { version: env!("CARGO_PKG_VERSION").to_string(), config, checks, verdict }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits::default());
        self.serialize(&mut ser).expect("report serialisation is infallible");
        buf.push(b'\n');
        String::from_utf8(buf).expect("serde_json writes UTF-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "warpcheck {}", self.version);
        let _ = writeln!(s, "target: {} ({})", c.target, c.example);
        let _ = writeln!(s, "checks: {}  points: {}  seed: {}", c.checks.join(","), c.points, c.seed);
        let tols: Vec<String> = c.tolerances.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
        let _ = writeln!(s, "tolerances: {}", tols.join(" "));
        for r in &self.checks {
            let status = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            let _ = write!(s, "\n[{status}] {} ({}): {}\n  worst {} = {}", r.name, r.group, r.anchor, label(r.worst_is), num(r.worst));
            if let Some(t) = r.tolerance {
                let _ = write!(s, "  tolerance = {}", num(t));
            }
            if let Some(h) = r.holds {
                let _ = write!(s, "  holds = {h}");
            }
            if let Some(e) = r.equality {
                let _ = write!(s, "  equality = {e}");
            }
            s.push('\n');
            if let Some(n) = &r.note {
                let _ = writeln!(s, "  note: {n}");
            }
            for v in &r.values {
                let coords: Vec<String> = v.point.iter().map(|x| num(*x)).collect();
                let _ = write!(s, "  #{} x = [{}] value = {}", v.index, coords.join(", "), num(v.value));
                if let Some(l) = v.lhs {
                    let _ = write!(s, " lhs = {}", num(l));
                }
                if let Some(r) = v.rhs {
                    let _ = write!(s, " rhs = {}", num(r));
                }
                s.push('\n');
            }
        }
        let _ = writeln!(s, "\nverdict: {}", if self.verdict == Verdict::Pass { "PASS" } else { "FAIL" });
        s
    }
}

fn label(w: Worst) -> &'static str {
    match w {
        Worst::Max => "(max)",
        Worst::Min => "(min)",
    }
}

/// A number with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Pretty JSON whose floats are printed by [`num`].
#[derive(Default)]
struct FixedDigits {
    inner: PrettyFormatter<'static>,
}

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(num(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
