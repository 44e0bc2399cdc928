//! Run configuration: `key=value` files overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use momentheat::checks::Suite;
use momentheat::evolution::Projection;
use momentheat::galerkin::Space;

use crate::error::CliError;

/// Keys accepted in config files; they match the long flag names.
pub const KEYS: &[&str] = &[
    "dim",
    "cutoff",
    "space",
    "count",
    "out",
    "ic",
    "t-end",
    "samples",
    "projection",
    "suite",
    "cutoffs",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceChoice {
    V,
    Vtilde,
    Krein,
}

impl SpaceChoice {
    /// The subspace whose basis carries the run.
    pub fn space(self) -> Space {
        match self {
            SpaceChoice::Vtilde => Space::Vtilde,
            SpaceChoice::V | SpaceChoice::Krein => Space::V,
        }
    }
}

impl FromStr for SpaceChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "v" => Ok(SpaceChoice::V),
            "vtilde" => Ok(SpaceChoice::Vtilde),
            "krein" => Ok(SpaceChoice::Krein),
            _ => Err(format!("expected v, vtilde or krein, got `{s}`")),
        }
    }
}

fn parse_projection(s: &str) -> Result<Projection, String> {
    match s {
        "h" => Ok(Projection::H),
        "l2" => Ok(Projection::L2),
        _ => Err(format!("expected h or l2, got `{s}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub cutoff: usize,
    pub space: SpaceChoice,
    /// Number of eigenvalue clusters to report; all when `None`.
    pub count: Option<usize>,
    pub out: Option<PathBuf>,
    pub ic: Option<String>,
    pub t_end: f64,
    pub samples: usize,
    pub projection: Projection,
    pub suite: Option<Suite>,
    pub cutoffs: Vec<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            cutoff: 8,
            space: SpaceChoice::Vtilde,
            count: None,
            out: None,
            ic: None,
            t_end: 0.1,
            samples: 11,
            projection: Projection::H,
            suite: None,
            cutoffs: Vec::new(),
            seed: 0x5eed,
        }
    }
}

impl RunConfig {
    /// Sample times `0, T/(n-1), ..., T`.
    pub fn times(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![0.0];
        }
        let n = self.samples - 1;
        (0..=n).map(|i| self.t_end * i as f64 / n as f64).collect()
    }

    /// Builds a config from `settings`, validating every value.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (key, value) in settings {
            let bad = |msg: String| CliError::Config(format!("{key}: {msg}"));
            let value = value.as_str();
            match key.as_str() {
                "dim" => cfg.dim = number(value).map_err(bad)?,
                "cutoff" => cfg.cutoff = number(value).map_err(bad)?,
                "space" => cfg.space = value.parse().map_err(bad)?,
                "count" => cfg.count = Some(number(value).map_err(bad)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "ic" => cfg.ic = Some(value.to_string()),
                "t-end" => cfg.t_end = number(value).map_err(bad)?,
                "samples" => cfg.samples = number(value).map_err(bad)?,
                "projection" => cfg.projection = parse_projection(value).map_err(bad)?,
                "suite" => cfg.suite = Some(value.parse().map_err(|e: momentheat::Error| bad(e.to_string()))?),
                "cutoffs" => {
                    cfg.cutoffs = value
                        .split(',')
                        .map(|s| number(s.trim()))
                        .collect::<Result<_, _>>()
                        .map_err(bad)?
                }
                "seed" => cfg.seed = number(value).map_err(bad)?,
                _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=3).contains(&self.dim) {
            return Err(CliError::Config(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.cutoff < 1 || self.cutoffs.contains(&0) {
            return Err(CliError::Config("cutoff must be at least 1".into()));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(CliError::Config(format!("t-end must be finite and nonnegative, got {}", self.t_end)));
        }
        if self.samples < 1 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(())
    }
}

fn number<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse `{s}`"))
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", n + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn config_file_lines() {
        let map = parse_config("# run\ndim = 2\n\ncutoff=4\nic=cos(2*pi*x) + 1\n").unwrap();
        assert_eq!(map["dim"], "2");
        assert_eq!(map["ic"], "cos(2*pi*x) + 1");
        let cfg = RunConfig::from_settings(&map).unwrap();
        assert_eq!((cfg.dim, cfg.cutoff), (2, 4));
        assert!(parse_config("dim 2").is_err());
        assert!(parse_config("colour=red").is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(RunConfig::from_settings(&settings(&[("dim", "4")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("cutoff", "0")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("t-end", "-1")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("samples", "0")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("space", "w")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("cutoffs", "4,0")])).is_err());
        let cfg = RunConfig::from_settings(&settings(&[("cutoffs", "2, 4,8"), ("suite", "kreinbc")])).unwrap();
        assert_eq!(cfg.cutoffs, vec![2, 4, 8]);
        assert_eq!(cfg.suite, Some(Suite::KreinBc));
    }

    #[test]
    fn sample_times() {
        let mut cfg = RunConfig {
            t_end: 1.0,
            samples: 5,
            ..RunConfig::default()
        };
        assert_eq!(cfg.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        cfg.samples = 1;
        assert_eq!(cfg.times(), vec![0.0]);
    }
}
