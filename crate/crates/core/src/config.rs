//! Problem files: flat `key = value` lines with an optional `[params]` section.
//!
//! ```text
//! # canonical family
//! f = T*(x^2 + x^3/3)
//! g = 1/(1 + x^2)
//! alpha = -1/2
//! beta = 1/2
//! n = 2
//! T = 1024
//!
//! [params]
//! a = 0.25
//! ```
//!
//! `f` and `g` are kept as raw expression text. Every other value is a
//! constant expression, so `alpha = -pi/4` is fine. Numeric keys may refer to
//! names from `[params]`.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::expr::{parse, Params};
use crate::problem::{PhaseProblem, Scales};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key: {key}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key: {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key: {0}")]
    MissingKey(&'static str),
    #[error("bad value for {key}: {message}")]
    BadValue { key: String, message: String },
    #[error("{0}")]
    Problem(String),
}

const KEYS: [&str; 10] = ["f", "g", "alpha", "beta", "n", "M", "N", "T", "U", "grid"];
const REQUIRED: [&str; 5] = ["f", "g", "alpha", "beta", "n"];

/// A parsed but not yet validated problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub f: String,
    pub g: String,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub m: Option<f64>,
    pub big_n: Option<f64>,
    pub t: Option<f64>,
    pub u: Option<f64>,
    pub grid: Option<usize>,
    pub params: Params,
}

fn constant(key: &str, text: &str, params: &Params) -> Result<f64, ConfigError> {
    let bad = |message: String| ConfigError::BadValue { key: key.to_string(), message };
    let e = parse(text).map_err(|e| bad(e.to_string()))?;
    if e.mentions("x") {
        return Err(bad("must not depend on x".into()));
    }
    let v = e.eval_real(0.0, params).map_err(|e| bad(e.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("{text} is not finite")))
    }
}

fn count(key: &str, text: &str, params: &Params) -> Result<usize, ConfigError> {
    let v = constant(key, text, params)?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(ConfigError::BadValue { key: key.to_string(), message: format!("expected a non-negative integer, got {v}") })
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<&str, &str> = BTreeMap::new();
        let mut raw_params: Vec<(String, &str)> = Vec::new();
        let mut in_params = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if line == "[params]" {
                    in_params = true;
                    continue;
                }
                return Err(ConfigError::Syntax { line: line_no, message: format!("unknown section {line}") });
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: line_no, message: "expected key = value".into() });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line: line_no, message: "expected key = value".into() });
            }
            if in_params {
                if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    || key.starts_with(|c: char| c.is_ascii_digit())
                {
                    return Err(ConfigError::Syntax { line: line_no, message: format!("bad parameter name {key}") });
                }
                if raw_params.iter().any(|(k, _)| k == key) {
                    return Err(ConfigError::DuplicateKey { line: line_no, key: key.to_string() });
                }
                raw_params.push((key.to_string(), value));
            } else {
                let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                    return Err(ConfigError::UnknownKey { line: line_no, key: key.to_string() });
                };
                if raw.insert(known, value).is_some() {
                    return Err(ConfigError::DuplicateKey { line: line_no, key: key.to_string() });
                }
            }
        }
        for key in REQUIRED {
            if !raw.contains_key(key) {
                return Err(ConfigError::MissingKey(key));
            }
        }

        // parameters may use the ones defined above them
        let mut params = Params::new();
        for (name, text) in raw_params {
            let v = constant(&name, text, &params)?;
            params.insert(name, v);
        }
        let opt = |key: &str| raw.get(key).map(|t| constant(key, t, &params)).transpose();
        Ok(ProblemConfig {
            f: raw["f"].to_string(),
            g: raw["g"].to_string(),
            alpha: constant("alpha", raw["alpha"], &params)?,
            beta: constant("beta", raw["beta"], &params)?,
            n: count("n", raw["n"], &params)?,
            m: opt("M")?,
            big_n: opt("N")?,
            t: opt("T")?,
            u: opt("U")?,
            grid: raw.get("grid").map(|t| count("grid", t, &params)).transpose()?,
            params,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Builds the problem. `order` overrides `n` and `t` overrides `T`.
    pub fn problem(&self, order: Option<usize>, t: Option<f64>) -> Result<PhaseProblem, ConfigError> {
        let wrap = |e: crate::Error| ConfigError::Problem(e.to_string());
        let mut p = PhaseProblem::new(&self.f, &self.g, self.alpha, self.beta, order.unwrap_or(self.n)).map_err(wrap)?;
        p.params = self.params.clone();
        p.scales = Scales {
            m: self.m.unwrap_or(self.beta - self.alpha),
            n: self.big_n.unwrap_or(1.0),
            t: t.or(self.t).unwrap_or(f64::NAN),
            u: self.u.unwrap_or(1.0),
        };
        if let Some(grid) = self.grid {
            p.grid = grid;
        }
        p.finish().map_err(wrap)
    }
}
