//! Scenario documents: one JSON object per run, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use altlin::catalog::{CatalogId, KTransform, MagneticGauge, Structure, TanhStructure};
use altlin::linstruct::{Point, Tolerances};
use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

use crate::error::CliError;

/// Tolerance names a scenario may override, with their defaults.
pub const TOLERANCES: [(&str, f64); 16] = [
    ("round", 1e-12),
    ("fd", 1e-6),
    ("assoc", 1e-9),
    ("lin", 1e-9),
    ("flow", 1e-8),
    ("curve", 1e-6),
    ("symplectic", 1e-10),
    ("larmor", 1e-9),
    ("energy", 1e-9),
    ("expm", 1e-10),
    ("rk4", 1e-6),
    ("weyl", 1e-14),
    ("composition", 1e-10),
    ("ccr", 1e-3),
    ("mismatch", 1e-2),
    ("limit", 1e-3),
];

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub structure_id: String,
    #[serde(default)]
    pub lambda: f64,
    #[serde(rename = "B", default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seeds: Vec<Vec<f64>>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed of every random draw.
    #[serde(default)]
    pub seed: u64,
    /// Number of random draws of the axiom suite.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Polynomial vector potential, required by `magnetic-custom`.
    #[serde(default)]
    pub potential: Option<Vec<PotentialTerm>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub extent: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 256, extent: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_span: [f64; 2],
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 0.01, t_span: [0.0, 1.0] }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Svg,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_out")]
    pub path: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { format: Format::Csv, path: default_out() }
    }
}

/// `coeff · (q¹)^a (q²)^b (q³)^c` added to component `component` of `A`.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialTerm {
    pub component: usize,
    pub coeff: f64,
    pub powers: [u32; 3],
}

fn one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    1000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn catalog_id(&self) -> Result<CatalogId, CliError> {
        CatalogId::from_str(&self.structure_id).map_err(|e| config(e.to_string()))
    }

    fn validate(&self) -> Result<(), CliError> {
        let id = self.catalog_id()?;
        for (name, v) in &self.tolerances {
            if !TOLERANCES.iter().any(|(k, _)| k == name) {
                return Err(config(format!("unknown tolerance {name:?}")));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(config(format!("tolerance {name:?} must be positive, got {v}")));
            }
        }
        if !self.lambda.is_finite() || !self.b.is_finite() {
            return Err(config("lambda and B must be finite"));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(config(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.grid.extent.is_finite() && self.grid.extent > 0.0) {
            return Err(config("grid extent must be positive"));
        }
        let [t0, t1] = self.integrator.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(config("t_span must be an increasing pair of finite times"));
        }
        if !(self.integrator.dt.is_finite() && self.integrator.dt > 0.0) {
            return Err(config("dt must be positive"));
        }
        if self.seeds.iter().flatten().any(|v| !v.is_finite()) {
            return Err(config("seeds must be finite"));
        }
        if self.samples == 0 {
            return Err(config("samples must be positive"));
        }
        match (&self.potential, id) {
            (None, CatalogId::MagneticCustom) => return Err(config("magnetic-custom needs a potential")),
            (Some(terms), _) => {
                if let Some(t) = terms.iter().find(|t| t.component > 2 || !t.coeff.is_finite()) {
                    return Err(config(format!("bad potential term {t:?}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Tolerance `name` after overrides, times `scale`.
    pub fn tolerance(&self, name: &str, scale: f64) -> f64 {
        let base = TOLERANCES.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).expect("tolerance name is tabulated");
        self.tolerances.get(name).copied().unwrap_or(base) * scale
    }

    pub fn linstruct_tolerances(&self, scale: f64) -> Tolerances {
        Tolerances {
            round: self.tolerance("round", scale),
            fd: self.tolerance("fd", scale),
            assoc: self.tolerance("assoc", scale),
            lin: self.tolerance("lin", scale),
            flow: self.tolerance("flow", scale),
            ..Tolerances::default()
        }
    }

    pub fn k_transform(&self) -> Result<KTransform, CliError> {
        KTransform::new(self.lambda).map_err(|e| config(e.to_string()))
    }

    pub fn structure(&self) -> Result<Structure, CliError> {
        Ok(match self.catalog_id()? {
            CatalogId::KTransform => Structure::KTransform(self.k_transform()?),
            CatalogId::Tanh => Structure::Tanh(TanhStructure::default()),
            CatalogId::MagneticSymmetric => Structure::Magnetic(MagneticGauge::symmetric_z(self.b)),
            CatalogId::MagneticCustom => {
                Structure::Magnetic(custom_gauge(self.potential.as_deref().expect("validated")))
            }
        })
    }

    /// Seeds of dimension `dim`, or `fallback` when none are configured.
    pub fn seeds_of_dim(&self, dim: usize, fallback: &[&[f64]]) -> Result<Vec<Point>, CliError> {
        if self.seeds.is_empty() {
            return Ok(fallback.iter().map(|s| Point::from_column_slice(s)).collect());
        }
        self.seeds
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.len() == dim {
                    Ok(Point::from_column_slice(s))
                } else {
                    Err(config(format!("seed {i} has dimension {}, expected {dim}", s.len())))
                }
            })
            .collect()
    }
}

fn monomial(q: &Vector3<f64>, powers: [u32; 3]) -> f64 {
    (0..3).map(|i| q[i].powi(powers[i] as i32)).product()
}

/// Gauge with a polynomial potential and its exact Jacobian.
pub fn custom_gauge(terms: &[PotentialTerm]) -> MagneticGauge {
    let terms: Arc<[PotentialTerm]> = terms.into();
    let linear = terms.iter().all(|t| t.powers.iter().sum::<u32>() == 1);
    let pt = terms.clone();
    let potential = move |q: &Vector3<f64>| {
        let mut a = Vector3::zeros();
        for t in pt.iter() {
            a[t.component] += t.coeff * monomial(q, t.powers);
        }
        a
    };
    let jacobian = move |q: &Vector3<f64>| {
        let mut m = Matrix3::zeros();
        for t in terms.iter() {
            for j in 0..3 {
                if t.powers[j] == 0 {
                    continue;
                }
                let mut lowered = t.powers;
                lowered[j] -= 1;
                m[(t.component, j)] += t.coeff * t.powers[j] as f64 * monomial(q, lowered);
            }
        }
        m
    };
    MagneticGauge::custom("magnetic-custom", potential, Some(Arc::new(jacobian)), linear)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let s = Scenario::parse(r#"{"structure_id": "tanh"}"#).unwrap();
        assert_eq!(s.grid, GridConfig::default());
        assert_eq!(s.seed, 0);
        assert_eq!(s.tolerance("assoc", 1.0), 1e-9);
        assert_eq!(s.tolerance("assoc", 10.0), 1e-8);
    }

    #[test]
    fn rejections() {
        for bad in [
            r#"{"structure_id": "tanh", "extra": 1}"#,
            r#"{"structure_id": "sphere"}"#,
            r#"{"structure_id": "tanh", "tolerances": {"assoc": -1}}"#,
            r#"{"structure_id": "tanh", "tolerances": {"made_up": 1}}"#,
            r#"{"structure_id": "tanh", "grid": {"N": 64, "extent": 1, "dx": 2}}"#,
            r#"{"structure_id": "tanh", "integrator": {"dt": 0.1, "t_span": [1, 0]}}"#,
            r#"{"structure_id": "magnetic-custom"}"#,
            r#"{"structure_id": "tanh", "output": {"format": "png"}}"#,
        ] {
            assert!(matches!(Scenario::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
        let neg = Scenario::parse(r#"{"structure_id": "k-transform", "lambda": -1}"#).unwrap();
        assert!(matches!(neg.structure(), Err(CliError::Config(_))));
    }

    #[test]
    fn custom_potential_jacobian_matches_differences() {
        let terms = [
            PotentialTerm { component: 1, coeff: 0.5, powers: [2, 0, 0] },
            PotentialTerm { component: 0, coeff: -1.0, powers: [0, 1, 1] },
        ];
        let g = custom_gauge(&terms);
        assert!(!g.is_declared_linear());
        let q = Vector3::new(0.3, -0.7, 1.1);
        assert!((g.potential(&q) - Vector3::new(0.77, 0.045, 0.0)).amax() < 1e-15);
        let h = 1e-6;
        let mut fd = Matrix3::zeros();
        for j in 0..3 {
            let mut e = Vector3::zeros();
            e[j] = h;
            fd.set_column(j, &((g.potential(&(q + e)) - g.potential(&(q - e))) / (2.0 * h)));
        }
        assert!((g.potential_jacobian(&q) - fd).amax() < 1e-8);
    }
}
