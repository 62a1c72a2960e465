//! Run configuration: a JSON document with flat dotted keys, overridden by
//! `--set key=value` pairs and then by dedicated flags.

use std::collections::BTreeMap;
use std::path::Path;

use panelqr::{Algorithm, Error, Result};
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "PANELQR_SEED";
pub const DEFAULT_SEED: u64 = 2021;

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "quantiles",
    "algorithm",
    "iterations",
    "burn_in",
    "thin",
    "store_alpha",
    "mundlak",
    "prior.beta_var",
    "prior.zeta_var",
    "prior.c1",
    "prior.d1",
    "sim.n",
    "sim.t_min",
    "sim.t_max",
    "sim.quantile",
    "sim.beta",
    "sim.zeta",
    "sim.sigma_alpha_sq",
    "sim.low",
    "sim.high",
];

/// Flat key/value view of a configuration document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, obj: &Map<String, Value>, out: &mut BTreeMap<String, Value>) {
    for (k, v) in obj {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(inner) => flatten(&key, inner, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl ConfigDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let Value::Object(obj) = v else {
            return Err(Error::config("config", "top level must be a JSON object"));
        };
        let mut values = BTreeMap::new();
        flatten("", &obj, &mut values);
        let doc = Self { values };
        doc.check_keys()?;
        Ok(doc)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_json(&text)
            }
        }
    }

    fn check_keys(&self) -> Result<()> {
        match self.values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            Some(k) => Err(Error::config(k.clone(), "unknown configuration key")),
            None => Ok(()),
        }
    }

    /// Applies `key=value` overrides. Values are parsed as JSON when
    /// possible and kept as strings otherwise.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<()> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::config("--set", format!("expected key=value, got `{pair}`")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            self.values.insert(k.trim().to_string(), value);
        }
        self.check_keys()
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn as_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                .ok_or_else(|| Error::config(key, format!("expected a number, got {v}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                .map(|x| x as usize)
                .ok_or_else(|| Error::config(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        self.values
            .get(key)
            .map(|v| {
                v.as_u64()
                    .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                    .ok_or_else(|| Error::config(key, format!("expected a non-negative integer, got {v}")))
            })
            .transpose()
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(Value::String(s)) if s == "true" || s == "false" => Ok(s == "true"),
            Some(v) => Err(Error::config(key, format!("expected true or false, got {v}"))),
        }
    }

    pub fn string_opt(&self, key: &str) -> Result<Option<String>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Error::config(key, format!("expected a string, got {v}"))),
        }
    }

    /// A list given either as a JSON array or a comma-separated string.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let bad = |v: &Value| Error::config(key, format!("expected a list of numbers, got {v}"));
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| v.as_f64().ok_or_else(|| bad(v))).collect::<Result<_>>().map(Some),
            Some(Value::Number(n)) => Ok(Some(vec![n.as_f64().unwrap()])),
            Some(v @ Value::String(s)) => s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad(v)))
                .collect::<Result<_>>()
                .map(Some),
            Some(v) => Err(bad(v)),
        }
    }

    pub fn string_list(&self, key: &str) -> Result<Option<Vec<String>>> {
        let bad = |v: &Value| Error::config(key, format!("expected a list of names, got {v}"));
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad(v)))
                .collect::<Result<_>>()
                .map(Some),
            Some(Value::String(s)) => Ok(Some(
                s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect(),
            )),
            Some(v) => Err(bad(v)),
        }
    }

    pub fn algorithm_or(&self, key: &str, default: Algorithm) -> Result<Algorithm> {
        match self.string_opt(key)? {
            None => Ok(default),
            Some(s) => s.parse(),
        }
    }

    /// Seed precedence: `--seed` flag, then the document, then the
    /// environment, then the built-in default.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(s) = self.u64_opt("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::config(SEED_ENV, format!("expected a non-negative integer, got `{v}`"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}
