//! Analysis configuration files.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem1d::{Discretization, ProblemDefinition, ProblemSpec, MIN_ELEMENTS};
use crate::numerics::{DEFAULT_KERNEL_TOL, MAX_DIM};
use crate::verdicts::TheoremId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub problem: ProblemDefinition,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub theorems: TheoremSelection,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub verify_with_oracle: bool,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_tolerance() -> f64 {
    DEFAULT_KERNEL_TOL
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            theorems: TheoremSelection::default(),
            tolerance: DEFAULT_KERNEL_TOL,
            verify_with_oracle: false,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TheoremSelection {
    Auto(AutoKeyword),
    List(Vec<TheoremId>),
}

impl Default for TheoremSelection {
    fn default() -> Self {
        TheoremSelection::Auto(AutoKeyword::Auto)
    }
}

impl TheoremSelection {
    pub fn is_auto(&self) -> bool {
        matches!(self, TheoremSelection::Auto(_))
    }

    pub fn theorems(&self) -> Vec<TheoremId> {
        match self {
            TheoremSelection::Auto(_) => TheoremId::AUTO_ORDER.to_vec(),
            TheoremSelection::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Shooting,
    Newton,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_method")]
    pub method: OracleMethod,
    #[serde(default = "default_s_range")]
    pub s_range: [f64; 2],
    /// Random Newton starts, in addition to the mode-based ones.
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> OracleMethod {
    OracleMethod::Newton
}

fn default_s_range() -> [f64; 2] {
    [-20.0, 20.0]
}

fn default_starts() -> usize {
    8
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            method: default_method(),
            s_range: default_s_range(),
            starts: default_starts(),
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{pointer}: {msg}")]
    Schema { pointer: String, msg: String },
}

impl ConfigError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            ConfigError::Schema { pointer, .. } => Some(pointer),
            ConfigError::Io { .. } => None,
        }
    }
}

fn schema(pointer: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        pointer: pointer.to_string(),
        msg: msg.into(),
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub document: ConfigDocument,
    pub spec: ProblemSpec,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let document: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            schema(&pointer, e.into_inner().to_string())
        })?;
        Config::from_document(document)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_json(&text)
    }

    pub fn from_document(document: ConfigDocument) -> Result<Config, ConfigError> {
        let n = document.mesh.n_elements;
        if n < MIN_ELEMENTS {
            return Err(schema("/mesh/n_elements", format!("{n} is below the minimum {MIN_ELEMENTS}")));
        }
        if n > MAX_DIM + 1 {
            return Err(schema(
                "/mesh/n_elements",
                format!("{n} exceeds the maximum {}", MAX_DIM + 1),
            ));
        }
        let a = &document.analysis;
        if !(a.tolerance > 0.0 && a.tolerance < 1.0) {
            return Err(schema("/analysis/tolerance", format!("{} is not in (0, 1)", a.tolerance)));
        }
        if let TheoremSelection::List(list) = &a.theorems {
            if list.is_empty() {
                return Err(schema("/analysis/theorems", "empty list"));
            }
        }
        let [lo, hi] = a.oracle.s_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(schema("/analysis/oracle/s_range", format!("[{lo}, {hi}] is not an interval")));
        }
        let spec = ProblemSpec::compile(&document.problem).map_err(|e| schema(&e.pointer, e.msg))?;
        Ok(Config { document, spec })
    }

    pub fn discretization(&self) -> Discretization {
        Discretization::new(self.document.mesh.n_elements).expect("mesh size validated")
    }
}
