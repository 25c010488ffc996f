//! File and stream plumbing shared by the subcommands.

use anyhow::{bail, Context, Result};
use kfr_core::generate::{generate, GenSpec};
use kfr_core::instance::{parse_instance, Instance};
use kfr_core::oracle::DEFAULT_BUDGET;
use serde_json::Value;
use std::io::Read;
use std::ops::RangeInclusive;
use std::path::Path;

/// Read an instance from a file, or from stdin when the path is `-`.
pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading instance from stdin")?;
        buf
    } else {
        std::fs::read_to_string(path)
            .with_context(|| format!("reading instance file {}", path.display()))?
    };
    parse_instance(&text).with_context(|| format!("parsing instance {}", path.display()))
}

/// Render a JSON document the way every output file is written: pretty,
/// stable key order, trailing newline.
pub fn render_json(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable document");
    text.push('\n');
    text
}

/// Write text to a file, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Write a JSON document to a file (never stdout).
pub fn write_json_file(path: &Path, doc: &Value) -> Result<()> {
    std::fs::write(path, render_json(doc)).with_context(|| format!("writing {}", path.display()))
}

/// The oracle workload budget, overridable via `KFR_ORACLE_BUDGET`.
pub fn oracle_budget() -> Result<u64> {
    match std::env::var("KFR_ORACLE_BUDGET") {
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_BUDGET),
        Err(err) => bail!("KFR_ORACLE_BUDGET is not valid unicode: {err}"),
        Ok(text) => text
            .parse()
            .with_context(|| format!("KFR_ORACLE_BUDGET must be an integer, got {text:?}")),
    }
}

/// Parse `N` or `A..B` (inclusive) into a seed range.
pub fn parse_seed_spec(text: &str) -> Result<RangeInclusive<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().context("bad range start")?;
        let b: u64 = b.trim().parse().context("bad range end")?;
        if a > b {
            bail!("empty seed range {text:?}");
        }
        Ok(a..=b)
    } else {
        let seed: u64 = text.trim().parse().context("bad seed")?;
        Ok(seed..=seed)
    }
}

/// Generate the instance a spec describes, with CLI-friendly errors.
pub fn build_instance(spec: &GenSpec) -> Result<Instance> {
    generate(spec).with_context(|| format!("generating instance for seed {}", spec.seed))
}
