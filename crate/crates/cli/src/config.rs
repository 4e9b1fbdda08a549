//! Plain-text `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use homopolymer::{Dimension, Profile, RadialPotential};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`, got `{text}`")]
    Syntax { path: String, line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Value { key: &'static str, reason: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn bad(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key,
        reason: reason.into(),
    }
}

/// Coupling requested on the command line: a number or the critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Coupling {
    Value(f64),
    #[serde(serialize_with = "ser_critical")]
    Critical,
}

fn ser_critical<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("critical")
}

/// `a:b:n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn parse(key: &'static str, s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(key, format!("expected a:b:n, got `{s}`")));
        }
        let start = parse_f64(key, parts[0])?;
        let stop = parse_f64(key, parts[1])?;
        let count = parse_usize(key, parts[2])?;
        if count < 2 || !(stop > start) {
            return Err(bad(key, "need b > a and n >= 2"));
        }
        Ok(Self { start, stop, count })
    }

    pub fn linear(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..=n).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect()
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        let (a, b) = (self.start.ln(), self.stop.ln());
        let n = self.count - 1;
        (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
    }
}

fn parse_f64(key: &'static str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s.trim().parse().map_err(|_| bad(key, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn parse_positive(key: &'static str, s: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(key, s)?;
    if !(v > 0.0) {
        return Err(bad(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn parse_usize(key: &'static str, s: &str) -> Result<usize, ConfigError> {
    s.trim().parse().map_err(|_| bad(key, format!("`{s}` is not a nonnegative integer")))
}

pub fn parse_coupling(key: &'static str, s: &str) -> Result<Coupling, ConfigError> {
    if s.trim() == "critical" {
        return Ok(Coupling::Critical);
    }
    let v = parse_f64(key, s)?;
    if v < 0.0 {
        return Err(bad(key, "must be >= 0"));
    }
    Ok(Coupling::Value(v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Well,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub shape: Shape,
    pub radius: f64,
    pub height: f64,
    /// Optional sampled profile `r:v` pairs overriding `shape`.
    pub samples: Option<Vec<(f64, f64)>>,
    pub d: u32,
    pub beta: Option<Coupling>,
    pub beta_grid: Option<GridSpec>,
    /// Relative excesses (β − β_cr)/β_cr for scaling scans, log-spaced.
    pub excess_grid: GridSpec,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub nodes: usize,
    pub h0: f64,
    pub h_max: f64,
    pub growth: f64,
    pub core_radius: f64,
    pub dt0: f64,
    pub dt_growth: f64,
    pub paths: usize,
    pub dt: f64,
    pub bins: usize,
    pub pinned: Option<f64>,
    pub seed: u64,
    /// Not serialized, so outputs do not depend on where they are written.
    #[serde(skip)]
    pub out: PathBuf,
    pub refine: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            shape: Shape::Well,
            radius: 1.0,
            height: 1.0,
            samples: None,
            d: 3,
            beta: None,
            beta_grid: None,
            excess_grid: GridSpec {
                start: 1e-3,
                stop: 1e-1,
                count: 9,
            },
            horizon: None,
            nodes: 32,
            h0: 0.01,
            h_max: 5.0,
            growth: 1.03,
            core_radius: 2.0,
            dt0: 0.01,
            dt_growth: 0.01,
            paths: 10_000,
            dt: 0.001,
            bins: 20,
            pinned: None,
            seed: 0,
            out: PathBuf::from("out"),
            refine: false,
        }
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "shape" => {
                self.shape = match value {
                    "well" => Shape::Well,
                    "bump" => Shape::Bump,
                    other => return Err(bad("shape", format!("expected well or bump, got `{other}`"))),
                }
            }
            "radius" => self.radius = parse_positive("radius", value)?,
            "height" => self.height = parse_positive("height", value)?,
            "samples" => {
                let pairs = value
                    .split(',')
                    .map(|p| {
                        let (r, v) = p.split_once(':').ok_or_else(|| bad("samples", format!("`{p}` is not r:v")))?;
                        Ok((parse_f64("samples", r)?, parse_f64("samples", v)?))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                self.samples = Some(pairs);
            }
            "d" => {
                let d = parse_usize("d", value)?;
                if !(1..=5).contains(&d) {
                    return Err(bad("d", format!("must be 1..=5, got {d}")));
                }
                self.d = d as u32;
            }
            "beta" => self.beta = Some(parse_coupling("beta", value)?),
            "beta_grid" => self.beta_grid = Some(GridSpec::parse("beta_grid", value)?),
            "excess_grid" => {
                let g = GridSpec::parse("excess_grid", value)?;
                if !(g.start > 0.0) {
                    return Err(bad("excess_grid", "excesses must be positive"));
                }
                self.excess_grid = g;
            }
            "T" | "t_end" => self.horizon = Some(parse_positive("T", value)?),
            "nodes" => {
                self.nodes = parse_usize("nodes", value)?;
                if self.nodes < 8 {
                    return Err(bad("nodes", "need at least 8"));
                }
            }
            "h0" => self.h0 = parse_positive("h0", value)?,
            "h_max" => self.h_max = parse_positive("h_max", value)?,
            "growth" => {
                self.growth = parse_f64("growth", value)?;
                if self.growth < 1.0 {
                    return Err(bad("growth", "must be >= 1"));
                }
            }
            "core_radius" => self.core_radius = parse_f64("core_radius", value)?.max(0.0),
            "dt0" => self.dt0 = parse_positive("dt0", value)?,
            "dt_growth" => self.dt_growth = parse_f64("dt_growth", value)?,
            "paths" | "n_paths" => {
                self.paths = parse_usize("paths", value)?;
                if self.paths == 0 {
                    return Err(bad("paths", "must be positive"));
                }
            }
            "dt" => self.dt = parse_positive("dt", value)?,
            "bins" => {
                self.bins = parse_usize("bins", value)?;
                if self.bins == 0 {
                    return Err(bad("bins", "must be positive"));
                }
            }
            "pinned" => self.pinned = Some(parse_positive("pinned", value)?),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed", format!("`{value}` is not a u64")))?,
            "out" => self.out = PathBuf::from(value),
            "refine" => {
                self.refine = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(bad("refine", format!("expected a boolean, got `{other}`"))),
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::default();
        for (k, v) in parse_pairs(&text, &path.display().to_string())? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.d).expect("validated on input")
    }

    pub fn potential(&self) -> Result<RadialPotential, ConfigError> {
        let profile = match (&self.samples, &self.shape) {
            (Some(pairs), _) => Profile::Sampled {
                r: pairs.iter().map(|p| p.0).collect(),
                v: pairs.iter().map(|p| p.1).collect(),
            },
            (None, Shape::Well) => Profile::Well,
            (None, Shape::Bump) => Profile::Bump,
        };
        RadialPotential::new(self.dimension(), profile, self.radius, self.height).map_err(|e| bad("samples", e.to_string()))
    }

    /// One-line description for CSV headers.
    pub fn header(&self) -> String {
        let shape = if self.samples.is_some() { "sampled".to_string() } else { format!("{:?}", self.shape).to_lowercase() };
        format!(
            "d={} shape={} radius={} height={} nodes={} h0={} h_max={} growth={} core_radius={} dt0={} dt_growth={}",
            self.d, shape, self.radius, self.height, self.nodes, self.h0, self.h_max, self.growth, self.core_radius, self.dt0, self.dt_growth
        )
    }
}

fn parse_pairs(text: &str, path: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            path: path.to_string(),
            line: i + 1,
            text: raw.to_string(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("beta_grid", "1:3:3").unwrap();
        assert_eq!(g.linear(), vec![1.0, 2.0, 3.0]);
        let l = GridSpec::parse("x", "0.001:0.1:3").unwrap().logarithmic();
        assert!((l[1] - 0.01).abs() < 1e-15);
        assert!(GridSpec::parse("beta_grid", "1:3").is_err());
        assert!(GridSpec::parse("beta_grid", "3:1:4").is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let mut c = ExperimentConfig::default();
        let e = c.set("radius", "-2").unwrap_err().to_string();
        assert!(e.contains("radius"), "{e}");
        let e = c.set("d", "7").unwrap_err().to_string();
        assert!(e.contains("`d`"), "{e}");
        assert!(matches!(c.set("colour", "red"), Err(ConfigError::UnknownKey(_))));
        c.set("beta", "critical").unwrap();
        assert_eq!(c.beta, Some(Coupling::Critical));
    }

    #[test]
    fn pairs_skip_comments() {
        let m = parse_pairs("# c\nd = 3 # dim\n\nbeta=2\n", "cfg").unwrap();
        assert_eq!(m["d"], "3");
        assert_eq!(m["beta"], "2");
        assert!(parse_pairs("nonsense\n", "cfg").is_err());
    }
}
