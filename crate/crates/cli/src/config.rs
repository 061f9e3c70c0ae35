//! Run configuration: a TOML file naming one geometry and a list of checks.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sgeo_core::GeometrySpec;

use crate::checks::{self, CATALOG};
use crate::error::CliError;

/// One requested check with its parameter overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub name: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum CheckEntry {
    Name(String),
    Full(CheckRequest),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    #[serde(default, deserialize_with = "check_list")]
    pub checks: Vec<CheckRequest>,
    /// Overrides of the default tolerances (see `sgeo list`).
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn check_list<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<CheckRequest>, D::Error> {
    let entries: Vec<CheckEntry> = Deserialize::deserialize(d)?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            CheckEntry::Name(name) => CheckRequest { name, params: toml::Table::new() },
            CheckEntry::Full(r) => r,
        })
        .collect())
}

impl RunConfig {
    pub fn new(geometry: GeometrySpec) -> Self {
        RunConfig { geometry, checks: Vec::new(), tolerances: BTreeMap::new(), seed: 0, output_path: None }
    }

    pub fn with_checks(mut self, names: &[&str]) -> Self {
        self.checks.extend(names.iter().map(|n| CheckRequest { name: n.to_string(), params: toml::Table::new() }));
        self
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Everything that can be rejected without building the geometry.
    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry.validate().map_err(|e| CliError::Config(format!("geometry: {e}")))?;
        let mut seen = std::collections::BTreeSet::new();
        for req in &self.checks {
            let def = checks::find(&req.name).ok_or_else(|| {
                let known: Vec<&str> = CATALOG.iter().map(|c| c.name).collect();
                CliError::Config(format!("unknown check `{}` (known: {})", req.name, known.join(", ")))
            })?;
            if !seen.insert(req.name.as_str()) {
                return Err(CliError::Config(format!("check `{}` listed twice", req.name)));
            }
            for key in req.params.keys() {
                if !def.params.iter().any(|p| p.name == key) {
                    return Err(CliError::Config(format!("check `{}` has no parameter `{key}`", req.name)));
                }
            }
        }
        for (key, v) in &self.tolerances {
            if checks::default_tolerance(key).is_none() {
                return Err(CliError::Config(format!("unknown tolerance `{key}`")));
            }
            if !v.is_finite() || *v < 0.0 {
                return Err(CliError::Config(format!("tolerance `{key}` must be a finite nonnegative number")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().or_else(|| checks::default_tolerance(key)).unwrap_or(f64::NAN)
    }
}

/// Parses `kind[:lambda][,key=value]...`, e.g. `torus,p=2,lambda=16` or
/// `circle:128`, into a validated geometry spec.
pub fn parse_geometry(text: &str) -> Result<GeometrySpec, CliError> {
    let mut parts = text.split(',');
    let head = parts.next().unwrap_or_default().trim();
    let mut table = toml::Table::new();
    let (kind, lambda) = match head.split_once(':') {
        Some((k, l)) => (k, Some(l)),
        None => (head, None),
    };
    table.insert("kind".into(), toml::Value::String(kind.to_string()));
    if let Some(l) = lambda {
        let l: i64 = l.parse().map_err(|_| CliError::Config(format!("bad lambda `{l}` in `{text}`")))?;
        table.insert("lambda".into(), toml::Value::Integer(l));
    }
    for kv in parts {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got `{kv}`")))?;
        let value = match toml::from_str::<toml::Table>(&format!("v = {}", v.trim())) {
            Ok(mut t) => t.remove("v").unwrap(),
            Err(_) => toml::Value::String(v.trim().to_string()),
        };
        table.insert(k.trim().to_string(), value);
    }
    let spec: GeometrySpec = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(format!("geometry `{text}`: {e}")))?;
    spec.validate().map_err(|e| CliError::Config(format!("geometry `{text}`: {e}")))?;
    Ok(spec)
}
