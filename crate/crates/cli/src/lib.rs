//! Scenario-driven front end for `altlin`: `axioms`, `curves`, `magnetic`
//! and `quantum` commands writing deterministic CSV (and SVG) files.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use error::CliError;
pub use report::Report;
pub use scenario::Scenario;

/// Environment variable multiplying every tolerance.
pub const TOL_SCALE_VAR: &str = "ALTLIN_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Axioms,
    Curves,
    Magnetic,
    Quantum,
}

/// Parse a tolerance scale, `None` meaning the default of 1.
pub fn parse_tol_scale(raw: Option<&str>) -> Result<f64, CliError> {
    let Some(raw) = raw else { return Ok(1.0) };
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(CliError::Config(format!("{TOL_SCALE_VAR} must be a positive number, got {raw:?}"))),
    }
}

/// Load `config`, run `cmd` and write its files under `out` (or the
/// scenario's output path).
pub fn run(cmd: Command, config: &Path, out: Option<&Path>, tol_scale: f64) -> Result<Report, CliError> {
    let s = Scenario::load(config)?;
    let dir: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| s.output.path.clone());
    match cmd {
        Command::Axioms => commands::axioms(&s, tol_scale, &dir),
        Command::Curves => commands::curves(&s, tol_scale, &dir),
        Command::Magnetic => commands::magnetic(&s, tol_scale, &dir),
        Command::Quantum => commands::quantum(&s, tol_scale, &dir),
    }
}
