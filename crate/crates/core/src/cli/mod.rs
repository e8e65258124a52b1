//! Batch entry point: configuration, named verification suites, calibration and reports.

pub mod config;
pub mod suites;

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use config::{FrozenConstants, Resolved, RunConfig, TorusConfig};
pub use suites::{run_suite, Check, Suite, SuiteReport};

use crate::exactalg::Rational;
use crate::geometric::{calibrate_c0, TorusKind};
use crate::group::HeckeFunction;
use crate::kernel::truncated_kernel;
use crate::spectral::{calibrate_formal_degree, regularized_period_and_c, SphericalDatum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit statuses of the `relform` binary.
pub mod status {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const REFUSED: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("refusing to overwrite {0} without --force-calibrate")]
    Refused(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn status(&self) -> i32 {
        match self {
            CliError::Usage(_) => status::USAGE,
            CliError::Refused(_) => status::REFUSED,
            CliError::Compute(_) | CliError::Io(_) => status::FAILED,
        }
    }
}

pub(crate) fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Serialize)]
struct SuiteFile<'a> {
    suite: &'a str,
    version: &'a str,
    config_hash: &'a str,
    passed: bool,
    checks: &'a [Check],
    data: &'a serde_json::Value,
}

/// Writes `<suite>.json` (and any CSV attachment) under `out`.
pub fn write_report(report: &SuiteReport, hash: &str, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let file = SuiteFile {
        suite: report.suite.name(),
        version: VERSION,
        config_hash: hash,
        passed: report.passed(),
        checks: &report.checks,
        data: &report.data,
    };
    let json = serde_json::to_string_pretty(&file).expect("plain data serializes");
    std::fs::write(out.join(format!("{}.json", report.suite.file_stem())), json + "\n")?;
    for (name, bytes) in &report.attachments {
        std::fs::write(out.join(name), bytes)?;
    }
    Ok(())
}

/// Fits the formal degree and the split-torus constant on the indicator pair, anchored at
/// the exact kernel increment, and writes them to the constants file. An existing file is
/// only replaced with `force`, and the replacement is recorded in `<file>.changelog`.
pub fn calibrate(cfg: &RunConfig, out: &Path, force: bool) -> Result<FrozenConstants, CliError> {
    let path = cfg.constants_file(out);
    let previous = FrozenConstants::load(&path)?;
    if previous.is_some() && !force {
        return Err(CliError::Refused(path.display().to_string()));
    }
    let r = cfg.uncalibrated().resolve(None)?;
    let k = HeckeFunction::indicator_k();
    let anchor = truncated_kernel(r.params, &k, &k, 2).map_err(compute)?
        - truncated_kernel(r.params, &k, &k, 1).map_err(compute)?;
    let datum = SphericalDatum::build(r.params, 8, &r.caps).map_err(compute)?;
    let pf = regularized_period_and_c(&datum).map_err(compute)?;
    let d = calibrate_formal_degree(r.params, &pf, &anchor).map_err(compute)?;
    let split = r
        .tori
        .iter()
        .find(|t| t.kind == TorusKind::SplitM)
        .ok_or_else(|| CliError::Usage("no split torus configured".into()))?;
    let c0 = calibrate_c0(r.params, split, &anchor, &r.caps).map_err(compute)?;
    let fc = FrozenConstants {
        prime_q: r.params.q(),
        anchor_slope: anchor.to_string(),
        formal_degree: d.to_string(),
        split_c0: c0.to_string(),
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    if let Some(old) = previous {
        let mut log = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path.with_extension("changelog"))?;
        writeln!(
            log,
            "recalibrated (q = {}): formal_degree {} -> {}, split_c0 {} -> {}, anchor {} -> {}",
            fc.prime_q, old.formal_degree, fc.formal_degree, old.split_c0, fc.split_c0, old.anchor_slope, fc.anchor_slope
        )?;
    }
    let json = serde_json::to_string_pretty(&fc).expect("plain data serializes");
    std::fs::write(&path, json + "\n")?;
    Ok(fc)
}

/// Parses, validates and merges frozen constants.
pub fn prepare(cfg: &RunConfig, out: &Path) -> Result<Resolved, CliError> {
    let frozen = FrozenConstants::load(&cfg.constants_file(out))?;
    cfg.resolve(frozen.as_ref())
}

pub(crate) fn rs(x: &Rational) -> String {
    x.to_string()
}
