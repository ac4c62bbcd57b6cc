//! Experiment configuration: a flat `key = value` text format plus the
//! presets used for the published comparisons.
//!
//! ```text
//! # KdV, train to T = 3 and extrapolate to T = 8
//! model = kdv
//! domain = 0, 2
//! dx = 0.001
//! dt = 0.01
//! t_train = 3
//! t_final = 8
//! ranks = 70, 120
//! methods = ligep-rom, pod-galerkin
//! eta = 1
//! gamma = 0.022
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ligep::{Model, ModelKind};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "ligep-rom")]
    LigepRom,
    #[serde(rename = "pod-galerkin")]
    PodGalerkin,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::LigepRom => "ligep-rom",
            Method::PodGalerkin => "pod-galerkin",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ligep-rom" | "ligep" => Ok(Method::LigepRom),
            "pod-galerkin" | "galerkin" => Ok(Method::PodGalerkin),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(serialize_with = "serialize_kind")]
    pub model: ModelKind,
    pub domain: (f64, f64),
    pub dx: f64,
    pub dt: f64,
    pub t_train: f64,
    pub t_final: f64,
    pub ranks: Vec<usize>,
    pub methods: Vec<Method>,
    pub eta: f64,
    pub gamma: f64,
    pub c: f64,
    pub a: f64,
    pub x0: f64,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

fn serialize_kind<S: serde::Serializer>(kind: &ModelKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

const KEYS: &[&str] = &[
    "model", "domain", "dx", "dt", "t_train", "t_final", "ranks", "methods", "eta", "gamma", "c", "a", "x0",
    "output_dir", "seed",
];

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), reason: reason.into() }
}

fn number(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value.trim().parse().map_err(|_| invalid(key, format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses a comma-separated rank list such as `20,50`.
pub fn parse_ranks(value: &str) -> Result<Vec<usize>> {
    let ranks = list(value)
        .map(|s| s.parse::<usize>().map_err(|_| invalid("ranks", format!("`{s}` is not a positive integer"))))
        .collect::<Result<Vec<_>>>()?;
    if ranks.is_empty() {
        return Err(invalid("ranks", "empty list"));
    }
    Ok(ranks)
}

impl ExperimentConfig {
    /// Configuration of the published experiment for `model`.
    pub fn preset(model: ModelKind) -> Self {
        let base = Self {
            model,
            domain: (0.0, 1.0),
            dx: 0.0,
            dt: 0.0,
            t_train: 0.0,
            t_final: 0.0,
            ranks: Vec::new(),
            methods: vec![Method::LigepRom, Method::PodGalerkin],
            eta: 1.0,
            gamma: 0.022,
            c: 1.0,
            a: 30.0,
            x0: 0.0,
            output_dir: None,
            seed: 0,
        };
        match model {
            ModelKind::Wave => Self {
                domain: (-10.0, 10.0),
                dx: 0.02,
                dt: 0.01,
                t_train: 10.0,
                t_final: 40.0,
                ranks: vec![20, 50],
                ..base
            },
            ModelKind::Kdv => Self {
                domain: (0.0, 2.0),
                dx: 0.001,
                dt: 0.01,
                t_train: 3.0,
                t_final: 8.0,
                ranks: vec![70, 120],
                ..base
            },
            ModelKind::Ch => Self {
                domain: (0.0, 30.0),
                dx: 0.03,
                dt: 0.005,
                t_train: 6.0,
                t_final: 12.0,
                ranks: vec![70, 120],
                ..base
            },
        }
    }

    /// Parses the key-value format. Keys not given keep their preset value
    /// for the chosen model; `model` is mandatory.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, text: raw.trim().to_string() })?;
            let key = key.trim();
            let canonical = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
            if entries.insert(canonical, (line, value.trim())).is_some() {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
        }
        let (_, model) = entries.remove("model").ok_or(ConfigError::Missing("model"))?;
        let kind: ModelKind = model.parse().map_err(|_| invalid("model", format!("unknown model `{model}`")))?;
        let mut cfg = Self::preset(kind);
        for (key, (_, value)) in entries {
            match key {
                "domain" => {
                    let parts: Vec<&str> = list(value).collect();
                    if parts.len() != 2 {
                        return Err(invalid(key, "expected `a, b`"));
                    }
                    cfg.domain = (number(key, parts[0])?, number(key, parts[1])?);
                }
                "dx" => cfg.dx = number(key, value)?,
                "dt" => cfg.dt = number(key, value)?,
                "t_train" => cfg.t_train = number(key, value)?,
                "t_final" => cfg.t_final = number(key, value)?,
                "ranks" => cfg.ranks = parse_ranks(value)?,
                "methods" => {
                    cfg.methods = list(value)
                        .map(|s| s.parse::<Method>().map_err(|e| invalid(key, e)))
                        .collect::<Result<Vec<_>>>()?;
                }
                "eta" => cfg.eta = number(key, value)?,
                "gamma" => cfg.gamma = number(key, value)?,
                "c" => cfg.c = number(key, value)?,
                "a" => cfg.a = number(key, value)?,
                "x0" => cfg.x0 = number(key, value)?,
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                "seed" => cfg.seed = value.parse().map_err(|_| invalid(key, "expected an unsigned integer"))?,
                _ => unreachable!("key list and match are in sync"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if b <= a {
            return Err(invalid("domain", "need a < b"));
        }
        if self.dx <= 0.0 {
            return Err(invalid("dx", "must be positive"));
        }
        if self.dt <= 0.0 {
            return Err(invalid("dt", "must be positive"));
        }
        if self.t_train <= 0.0 {
            return Err(invalid("t_train", "must be positive"));
        }
        if self.t_train > self.t_final {
            return Err(invalid("t_train", "must not exceed t_final"));
        }
        self.nodes()?;
        for (key, t) in [("t_train", self.t_train), ("t_final", self.t_final)] {
            steps_for(key, t, self.dt)?;
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "empty list"));
        }
        if self.ranks.is_empty() {
            return Err(invalid("ranks", "empty list"));
        }
        let n = self.nodes()?;
        for &r in &self.ranks {
            if r == 0 || r > n {
                return Err(invalid("ranks", format!("rank {r} outside 1..={n}")));
            }
        }
        if self.model == ModelKind::Ch && self.a <= 0.0 {
            return Err(invalid("a", "peakon period must be positive"));
        }
        Ok(())
    }

    /// Number of grid nodes `(b - a)/dx`, which must be an integer.
    pub fn nodes(&self) -> Result<usize> {
        let ratio = (self.domain.1 - self.domain.0) / self.dx;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-8 * ratio.max(1.0) || n < 3.0 {
            return Err(invalid("dx", format!("does not divide the domain into at least 3 cells ({ratio})")));
        }
        Ok(n as usize)
    }

    pub fn train_steps(&self) -> usize {
        steps_for("t_train", self.t_train, self.dt).expect("validated")
    }

    pub fn final_steps(&self) -> usize {
        steps_for("t_final", self.t_final, self.dt).expect("validated")
    }

    pub fn model(&self) -> Model {
        match self.model {
            ModelKind::Wave => Model::Wave,
            ModelKind::Kdv => Model::Kdv { eta: self.eta, gamma: self.gamma },
            ModelKind::Ch => Model::Ch { c: self.c, a: self.a, x0: self.x0 },
        }
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }
}

fn steps_for(key: &str, t: f64, dt: f64) -> Result<usize> {
    let ratio = t / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-8 * ratio.max(1.0) || n < 1.0 {
        return Err(invalid(key, format!("{t} is not a positive multiple of dt = {dt}")));
    }
    Ok(n as usize)
}
