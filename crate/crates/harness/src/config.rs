//! Experiment configuration: flat `key = value` text or JSON.
//!
//! ```text
//! # cumulant sweep
//! len = 600
//! zetas = 0.02, 0.05, 0.1
//! renyi = 1, 2
//! trajectories = 10000
//! seed = 7
//! engines = analytic, lattice
//! ```
//!
//! A JSON report written by this crate is accepted as well; its embedded
//! `config` object is loaded.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mie_core::{cross_ratio, RingGeometry};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Lattice,
}

impl FromStr for Engine {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "analytic" => Ok(Self::Analytic),
            "lattice" => Ok(Self::Lattice),
            other => Err(HarnessError::Validation(format!("unknown engine {other:?}"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Lattice => "lattice",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(HarnessError::Validation(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ring length `L`.
    pub len: usize,
    /// `|A| = |C|` for ζ-targeted geometries; when absent, the widest
    /// regions that reach each target.
    pub region_len: Option<usize>,
    /// Explicit `[x1, x2, x3, x4]`; overrides `zetas`.
    pub bounds: Option<[usize; 4]>,
    /// Target cross-ratios. Lattice runs report the achieved value.
    pub zetas: Vec<f64>,
    pub g: f64,
    pub filling: f64,
    pub renyi: Vec<f64>,
    pub trajectories: usize,
    pub seed: u64,
    pub engines: Vec<Engine>,
    /// Enumerate every outcome string instead of sampling.
    pub exhaustive: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            len: 600,
            region_len: None,
            bounds: None,
            zetas: Vec::new(),
            g: 0.5,
            filling: 0.5,
            renyi: vec![1.0],
            trajectories: 1000,
            seed: 0,
            engines: vec![Engine::Analytic, Engine::Lattice],
            exhaustive: false,
            out: None,
            format: None,
        }
    }
}

/// A parameter point: the lattice geometry if one is needed, and the ζ at
/// which the analytic engine is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub geometry: Option<RingGeometry>,
    pub zeta: f64,
    pub target: Option<f64>,
}

const LIST_KEYS: [&str; 4] = ["zetas", "renyi", "bounds", "engines"];

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses either format; JSON is recognised by a leading `{`.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let value = if text.trim_start().starts_with('{') {
            let mut v: Value = serde_json::from_str(text)
                .map_err(|e| HarnessError::Validation(format!("config JSON: {e}")))?;
            match v.get_mut("config") {
                Some(inner) => inner.take(),
                None => v,
            }
        } else {
            Value::Object(parse_key_values(text)?)
        };
        serde_json::from_value(value).map_err(|e| HarnessError::Validation(format!("config: {e}")))
    }

    pub fn has_engine(&self, engine: Engine) -> bool {
        self.engines.contains(&engine)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Validation(m));
        if self.engines.is_empty() {
            return bad("no engine selected".into());
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return bad(format!("g must be positive, got {}", self.g));
        }
        if !(self.filling > 0.0 && self.filling < 1.0) {
            return bad(format!("filling must lie in (0, 1), got {}", self.filling));
        }
        if self.renyi.is_empty() {
            return bad("renyi list is empty".into());
        }
        if let Some(n) = self.renyi.iter().find(|&&n| !(n > 0.0 && n.is_finite())) {
            return bad(format!("Rényi indices must be positive, got {n}"));
        }
        if let Some(z) = self.zetas.iter().find(|&&z| !(z > 0.0 && z < 1.0)) {
            return bad(format!("cross-ratios must lie in (0, 1), got {z}"));
        }
        if self.bounds.is_none() && self.zetas.is_empty() {
            return bad("need either bounds or zetas".into());
        }
        if self.has_engine(Engine::Lattice) {
            if self.trajectories == 0 && !self.exhaustive {
                return bad("lattice runs need at least one trajectory".into());
            }
            if self.len < 4 || self.len % 2 != 0 {
                return bad(format!("ring length must be even and at least 4, got {}", self.len));
            }
        }
        self.points().map(|_| ())
    }

    /// Parameter points in configuration order.
    pub fn points(&self) -> Result<Vec<Point>, HarnessError> {
        let lattice = self.has_engine(Engine::Lattice);
        if let Some(b) = self.bounds {
            let geom = RingGeometry::new(self.len, b).map_err(|e| HarnessError::Validation(e.to_string()))?;
            return Ok(vec![Point {
                geometry: Some(geom),
                zeta: cross_ratio(&geom),
                target: None,
            }]);
        }
        self.zetas
            .iter()
            .map(|&target| {
                if !lattice {
                    return Ok(Point {
                        geometry: None,
                        zeta: target,
                        target: Some(target),
                    });
                }
                let geom = match self.region_len {
                    Some(r) => RingGeometry::closest_to_zeta(self.len, r, target),
                    None => RingGeometry::widest_for_zeta(self.len, target),
                }
                .map_err(|e| HarnessError::Validation(e.to_string()))?;
                Ok(Point {
                    geometry: Some(geom),
                    zeta: cross_ratio(&geom),
                    target: Some(target),
                })
            })
            .collect()
    }
}

fn parse_scalar(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(i) = raw.parse::<u64>() {
        return Value::from(i);
    }
    if let Ok(x) = raw.parse::<f64>() {
        return Value::from(x);
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        "none" | "" => Value::Null,
        s => Value::String(s.trim_matches('"').to_string()),
    }
}

fn parse_key_values(text: &str) -> Result<Map<String, Value>, HarnessError> {
    let mut map = Map::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Validation(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = if LIST_KEYS.contains(&key.as_str()) {
            Value::Array(
                raw.split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_scalar)
                    .collect(),
            )
        } else {
            parse_scalar(raw)
        };
        if map.insert(key.clone(), value).is_some() {
            return Err(HarnessError::Validation(format!("line {}: duplicate key {key}", lineno + 1)));
        }
    }
    Ok(map)
}
