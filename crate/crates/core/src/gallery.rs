//! Built-in examples, embedded from `gallery/*.toml`.

use std::path::Path;

use crate::config::{ConfigError, Example};
use crate::report::{Report, Verdict};
use crate::runner::{self, RunOptions};

/// Names and TOML sources of the built-in examples.
pub const BUILTINS: [(&str, &str); 9] = [
    ("chen-cr", include_str!("../gallery/chen-cr.toml")),
    ("hyperbolic-warped", include_str!("../gallery/hyperbolic-warped.toml")),
    ("s2-warped", include_str!("../gallery/s2-warped.toml")),
    ("round-s2", include_str!("../gallery/round-s2.toml")),
    ("trivial-product", include_str!("../gallery/trivial-product.toml")),
    ("sasakian-cr-candidate", include_str!("../gallery/sasakian-cr-candidate.toml")),
    ("perturbed-e1", include_str!("../gallery/perturbed-e1.toml")),
    ("torus", include_str!("../gallery/torus.toml")),
    ("sasakian-r5", include_str!("../gallery/sasakian-r5.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|&(n, _)| n)
}

pub fn source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|&&(n, _)| n == name).map(|&(_, s)| s)
}

/// Parses a built-in and runs its validation gate; a built-in whose gate
/// fails is an error, never a silently skipped example.
pub fn load_builtin(name: &str) -> Result<Example, ConfigError> {
    let text = source(name).ok_or_else(|| ConfigError::UnknownBuiltin(name.to_string()))?;
    let example = Example::from_toml(text)?;
    let report = validate(&example)?;
    if report.verdict != Verdict::Pass {
        let note = report.checks.first().and_then(|c| c.note.clone()).unwrap_or_default();
        return Err(ConfigError::Invalid(format!("built-in `{name}` fails its validation gate {note}")));
    }
    Ok(example)
}

/// Runs only the validation gate over the default point sample.
pub fn validate(example: &Example) -> Result<Report, ConfigError> {
    let opts = RunOptions { checks: Default::default(), ..RunOptions::default() };
    runner::run(example, example.name(), &opts)
}

/// Resolves a built-in name or a TOML file path. The returned label is the
/// built-in name or the file name without its directories, so reports do not
/// depend on where the file lives.
pub fn load_target(target: &str) -> Result<(Example, String), ConfigError> {
    if let Some(text) = source(target) {
        return Ok((Example::from_toml(text)?, target.to_string()));
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(ConfigError::UnknownTarget { target: target.to_string(), builtins: names().collect::<Vec<_>>().join(", ") });
    }
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: target.to_string(), message: e.to_string() })?;
    let label = path.file_name().map_or_else(|| target.to_string(), |n| n.to_string_lossy().into_owned());
    Ok((Example::from_toml(&text)?, label))
}
