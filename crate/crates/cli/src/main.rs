//! `warpcheck`: run the numerical checks of a built-in or TOML example.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or parse errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use warpcheck::gallery;
use warpcheck::report::Verdict;
use warpcheck::runner::{self, CheckGroup, RunOptions, Tolerances};

/// Environment variable selecting the number of worker threads.
const THREADS_VAR: &str = "WARPCHECK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "warpcheck", version, about = "Numerical checks for warped product submanifolds")]
struct Cli {
    /// Built-in example name or path to a TOML example file.
    #[arg(long, required_unless_present = "list")]
    target: Option<String>,
    /// Comma-separated check groups: structure, identities, classify, inequalities or all.
    #[arg(long, default_value = "all")]
    checks: String,
    /// Number of sample points.
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Offset into the Halton sequence.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// List the built-in examples and exit.
    #[arg(long)]
    list: bool,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("tolerance `{name}`: {e}"))?;
    Tolerances::check_override(name.trim(), value)?;
    Ok((name.trim().to_string(), value))
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got `{v}`")),
        },
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in gallery::names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let target = cli.target.as_deref().expect("clap enforces --target without --list");
    let checks = match CheckGroup::parse_list(&cli.checks) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return config_error(e),
    };
    let (example, label) = match gallery::load_target(target) {
        Ok(x) => x,
        Err(e) => return config_error(e),
    };
    let opts = RunOptions {
        checks,
        points: cli.points,
        seed: cli.seed,
        tol_overrides: cli.tol.into_iter().collect::<BTreeMap<_, _>>(),
        threads,
    };
    let report = match runner::run(&example, &label, &opts) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let rendered = match cli.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                return config_error(format!("cannot write `{}`: {e}", path.display()));
            }
        }
        None => print!("{rendered}"),
    }
    match report.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(1),
    }
}
