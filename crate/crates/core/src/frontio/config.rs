//! Job configuration: one JSON document, `"schema": 1`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::classify::{ChartWindow, Tolerances};
use crate::error::{Error, Result};
use crate::gfexpr::GeneratingFunction;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    MeshE,
    MeshM,
    Reports,
    Normalform,
    Identities,
}

impl Output {
    pub const ALL: [Output; 5] = [Output::MeshE, Output::MeshM, Output::Reports, Output::Normalform, Output::Identities];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub schema: u64,
    pub expression: String,
    pub n: usize,
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    pub window: ChartWindow,
    pub tolerances: Tolerances,
    pub outputs: BTreeSet<Output>,
    pub seed: u64,
    pub identity_trials: usize,
}

const KEYS: [&str; 9] = [
    "schema",
    "expression",
    "n",
    "I",
    "window",
    "tolerances",
    "outputs",
    "seed",
    "identity_trials",
];
const WINDOW_KEYS: [&str; 3] = ["center", "half_widths", "resolution"];
const TOLERANCE_KEYS: [&str; 7] = [
    "tol_root",
    "tau_zero",
    "tau_nonzero",
    "probe_radius",
    "probe_count",
    "delta",
    "kernel_tol",
];

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, key: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let map = v.as_object().ok_or_else(|| config_error(key, "expected an object"))?;
    for k in map.keys() {
        if !allowed.contains(&k.as_str()) {
            let full = if key.is_empty() { k.clone() } else { format!("{key}.{k}") };
            return Err(config_error(&full, "unknown key"));
        }
    }
    Ok(map)
}

fn field<T: DeserializeOwned>(map: &Map<String, Value>, prefix: &str, key: &str) -> Result<Option<T>> {
    let full = if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    map.get(key)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| config_error(&full, e.to_string())))
        .transpose()
}

fn required<T: DeserializeOwned>(map: &Map<String, Value>, prefix: &str, key: &str) -> Result<T> {
    let full = if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    field(map, prefix, key)?.ok_or_else(|| config_error(&full, "missing"))
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<JobConfig> {
        let value: Value = serde_json::from_str(text).map_err(|e| config_error("", format!("malformed JSON: {e}")))?;
        JobConfig::from_value(&value)
    }

    pub fn load(path: &Path) -> Result<JobConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        JobConfig::from_json(&text)
    }

    pub fn from_value(value: &Value) -> Result<JobConfig> {
        let top = object(value, "", &KEYS)?;
        let schema: u64 = required(top, "", "schema")?;
        if schema != SCHEMA_VERSION {
            return Err(config_error("schema", format!("unsupported version {schema}, expected {SCHEMA_VERSION}")));
        }
        let window_map = object(top.get("window").ok_or_else(|| config_error("window", "missing"))?, "window", &WINDOW_KEYS)?;
        let window = ChartWindow {
            center: required(window_map, "window", "center")?,
            half_widths: required(window_map, "window", "half_widths")?,
            resolution: required(window_map, "window", "resolution")?,
        };
        let tolerances = match top.get("tolerances") {
            Some(v) => {
                object(v, "tolerances", &TOLERANCE_KEYS)?;
                field(top, "", "tolerances")?.unwrap_or_default()
            }
            None => Tolerances::default(),
        };
        let outputs: Option<BTreeSet<Output>> = field(top, "", "outputs")?;
        let cfg = JobConfig {
            schema,
            expression: required(top, "", "expression")?,
            n: required(top, "", "n")?,
            i: required(top, "", "I")?,
            window,
            tolerances,
            outputs: outputs.unwrap_or_else(|| Output::ALL.into_iter().collect()),
            seed: field(top, "", "seed")?.unwrap_or(0),
            identity_trials: field(top, "", "identity_trials")?.unwrap_or(100),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(config_error("n", "must be at least 1"));
        }
        let w = &self.window;
        if w.center.len() != self.n {
            return Err(config_error("window.center", format!("expected {} entries", self.n)));
        }
        if w.center.iter().any(|c| !c.is_finite()) {
            return Err(config_error("window.center", "entries must be finite"));
        }
        if w.half_widths.len() != self.n {
            return Err(config_error("window.half_widths", format!("expected {} entries", self.n)));
        }
        if w.half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(config_error("window.half_widths", "entries must be positive and finite"));
        }
        if w.resolution < 2 {
            return Err(config_error("window.resolution", "must be at least 2"));
        }
        self.tolerances.validate()?;
        if self.identity_trials == 0 {
            return Err(config_error("identity_trials", "must be at least 1"));
        }
        self.generating_function()?;
        Ok(())
    }

    /// Parsed expression; parse and partition errors are reported under
    /// `expression` and `I`.
    pub fn generating_function(&self) -> Result<GeneratingFunction> {
        GeneratingFunction::parse(&self.expression, self.n, &self.i).map_err(|e| match e {
            Error::InvalidPartition(m) => config_error("I", m),
            other => config_error("expression", other.to_string()),
        })
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}
