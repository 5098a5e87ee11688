//! Flat key/value experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown experiment `{0}` (known: {1})")]
    UnknownExperiment(String, String),
    #[error("unknown key `{key}` for experiment `{experiment}` (known: {known})")]
    UnknownKey { experiment: String, key: String, known: String },
    #[error("bad value for `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ConfigError::BadValue { key: "format".into(), msg: format!("expected csv or json, got `{s}`") }),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// A typed parameter value; the default fixes the type.
#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Float(f64),
    Int(u64),
    Floats(Vec<f64>),
    Ints(Vec<u64>),
    Choice(String, &'static [&'static str]),
}

impl Param {
    pub fn to_json(&self) -> Value {
        match self {
            Param::Float(v) => json!(v),
            Param::Int(v) => json!(v),
            Param::Floats(v) => json!(v),
            Param::Ints(v) => json!(v),
            Param::Choice(s, _) => json!(s),
        }
    }

    /// Parse `--set` text into the type of `self`. Lists are comma separated.
    fn parse_text(&self, key: &str, text: &str) -> Result<Param, ConfigError> {
        let bad = |msg: String| ConfigError::BadValue { key: key.into(), msg };
        let float = |t: &str| parse_float(t).ok_or_else(|| bad(format!("`{t}` is not a number")));
        let int = |t: &str| t.trim().parse::<u64>().map_err(|_| bad(format!("`{t}` is not a non-negative integer")));
        let items = || text.split(',').map(str::trim).filter(|t| !t.is_empty());
        Ok(match self {
            Param::Float(_) => Param::Float(float(text)?),
            Param::Int(_) => Param::Int(int(text)?),
            Param::Floats(_) => Param::Floats(items().map(float).collect::<Result<_, _>>()?),
            Param::Ints(_) => Param::Ints(items().map(int).collect::<Result<_, _>>()?),
            Param::Choice(_, allowed) => choice(key, text, allowed)?,
        })
    }

    fn parse_toml(&self, key: &str, v: &toml::Value) -> Result<Param, ConfigError> {
        let bad = |msg: &str| ConfigError::BadValue { key: key.into(), msg: msg.into() };
        let float = |v: &toml::Value| match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(bad("expected a number")),
        };
        let int = |v: &toml::Value| match v {
            toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            _ => Err(bad("expected a non-negative integer")),
        };
        let list = |v: &toml::Value| match v {
            toml::Value::Array(a) => Ok(a.clone()),
            _ => Err(bad("expected an array")),
        };
        Ok(match self {
            Param::Float(_) => Param::Float(float(v)?),
            Param::Int(_) => Param::Int(int(v)?),
            Param::Floats(_) => Param::Floats(list(v)?.iter().map(float).collect::<Result<_, _>>()?),
            Param::Ints(_) => Param::Ints(list(v)?.iter().map(int).collect::<Result<_, _>>()?),
            Param::Choice(_, allowed) => match v {
                toml::Value::String(s) => choice(key, s, allowed)?,
                _ => return Err(bad("expected a string")),
            },
        })
    }
}

fn parse_float(t: &str) -> Option<f64> {
    let t = t.trim();
    match t {
        "pi" => Some(std::f64::consts::PI),
        "pi/2" => Some(std::f64::consts::FRAC_PI_2),
        "pi/4" => Some(std::f64::consts::FRAC_PI_4),
        _ => t.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

fn choice(key: &str, s: &str, allowed: &'static [&'static str]) -> Result<Param, ConfigError> {
    if allowed.contains(&s) {
        Ok(Param::Choice(s.to_string(), allowed))
    } else {
        Err(ConfigError::BadValue { key: key.into(), msg: format!("expected one of {allowed:?}, got `{s}`") })
    }
}

/// Resolved parameters of one run, keyed by name in sorted order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, Param>);

impl Params {
    fn get(&self, key: &str) -> &Param {
        self.0.get(key).unwrap_or_else(|| panic!("parameter `{key}` missing from schema"))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Param::Float(v) => *v,
            p => panic!("`{key}` is {p:?}"),
        }
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            Param::Int(v) => *v,
            p => panic!("`{key}` is {p:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Param::Floats(v) => v,
            p => panic!("`{key}` is {p:?}"),
        }
    }

    pub fn ints(&self, key: &str) -> &[u64] {
        match self.get(key) {
            Param::Ints(v) => v,
            p => panic!("`{key}` is {p:?}"),
        }
    }

    pub fn choice(&self, key: &str) -> &str {
        match self.get(key) {
            Param::Choice(s, _) => s,
            p => panic!("`{key}` is {p:?}"),
        }
    }

    /// Like [`Params::choice`] for keys that only some experiments have.
    pub fn choice_opt(&self, key: &str) -> Option<&str> {
        self.0.contains_key(key).then(|| self.choice(key))
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: Params,
    pub output_path: PathBuf,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "output_path": self.output_path.display().to_string(),
            "format": self.format.to_string(),
            "parameters": self.params.to_json(),
        })
    }
}

/// Raw inputs before validation: command-line flags take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub output_path: Option<PathBuf>,
    pub format: Option<String>,
    pub file_params: Vec<(String, toml::Value)>,
    pub set: Vec<(String, String)>,
}

impl RawConfig {
    /// Read a flat TOML file. `experiment`, `out` and `format` are reserved keys.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e| ConfigError::Invalid(format!("config file: {e}")))?;
        let mut raw = RawConfig::default();
        for (k, v) in table {
            let as_str = |v: &toml::Value| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| ConfigError::BadValue { key: k.clone(), msg: "expected a string".into() })
            };
            match k.as_str() {
                "experiment" => raw.experiment = Some(as_str(&v)?),
                "out" => raw.output_path = Some(as_str(&v)?.into()),
                "format" => raw.format = Some(as_str(&v)?),
                _ => {
                    if v.is_table() {
                        return Err(ConfigError::Invalid(format!("nested table `{k}`: configuration is flat")));
                    }
                    raw.file_params.push((k, v));
                }
            }
        }
        Ok(raw)
    }

    pub fn resolve(self) -> Result<ExperimentConfig, ConfigError> {
        let experiment = self.experiment.ok_or_else(|| ConfigError::Invalid("no experiment given".into()))?;
        let schema = crate::experiments::schema(&experiment).ok_or_else(|| {
            ConfigError::UnknownExperiment(experiment.clone(), crate::experiments::NAMES.join(", "))
        })?;
        let output_path = self.output_path.ok_or_else(|| ConfigError::Invalid("no output path given".into()))?;
        let format = match self.format {
            Some(f) => Format::parse(&f)?,
            None => match output_path.extension().and_then(|e| e.to_str()) {
                Some("json") => Format::Json,
                _ => Format::Csv,
            },
        };
        let mut params: BTreeMap<String, Param> = schema.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let unknown = |key: &str| ConfigError::UnknownKey {
            experiment: experiment.clone(),
            key: key.into(),
            known: schema.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", "),
        };
        for (k, v) in &self.file_params {
            let slot = params.get_mut(k).ok_or_else(|| unknown(k))?;
            *slot = slot.parse_toml(k, v)?;
        }
        for (k, v) in &self.set {
            let slot = params.get_mut(k).ok_or_else(|| unknown(k))?;
            *slot = slot.parse_text(k, v)?;
        }
        Ok(ExperimentConfig { experiment, params: Params(params), output_path, format })
    }
}

/// Split `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Invalid(format!("expected key=value, got `{s}`"))),
    }
}
