//! Pass/fail bookkeeping and the CSV and SVG writers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Fixed 17-significant-digit rendering used in every output file.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::AtMost, limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::AtLeast, limit }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::Info, limit: f64::NAN }
    }

    pub fn passes(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.limit,
            Bound::AtLeast => self.value >= self.limit,
            Bound::Info => true,
        }
    }

    fn relation(&self) -> &'static str {
        match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
            Bound::Info => "info",
        }
    }
}

/// Checks of one command plus the files it wrote.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(Check::passes)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passes() {
            0
        } else {
            1
        }
    }

    /// One line per check for the terminal.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match (c.bound, c.passes()) {
                (Bound::Info, _) => "INFO",
                (_, true) => "PASS",
                (_, false) => "FAIL",
            };
            if c.bound == Bound::Info {
                let _ = writeln!(s, "{tag} {} = {:.6e}", c.name, c.value);
            } else {
                let _ = writeln!(s, "{tag} {} = {:.6e} ({} {:.3e})", c.name, c.value, c.relation(), c.limit);
            }
        }
        s
    }

    /// `check,value,relation,limit,pass` rows.
    pub fn checks_csv(&self) -> String {
        let mut s = String::from("check,value,relation,limit,pass\n");
        for c in &self.checks {
            let limit = if c.bound == Bound::Info { String::new() } else { num(c.limit) };
            let _ = writeln!(s, "{},{},{},{},{}", c.name, num(c.value), c.relation(), limit, c.passes());
        }
        s
    }
}

pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| num(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

const PALETTE: [&str; 2] = ["#1f77b4", "#d62728"];

/// Overlay of planar polylines, coloured by `class` (0 or 1), in a square
/// viewport fitted to the data.
pub fn svg_polylines(lines: &[(usize, Vec<(f64, f64)>)]) -> String {
    let size = 600.0;
    let pad = 20.0;
    let pts = lines.iter().flat_map(|(_, l)| l.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let sx = |x: f64| pad + (x - x0) / span * (size - 2.0 * pad);
    let sy = |y: f64| size - pad - (y - y0) / span * (size - 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (class, l) in lines {
        let coords: Vec<String> = l.iter().map(|&(x, y)| format!("{:.4},{:.4}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            PALETTE[class % PALETTE.len()],
            coords.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
