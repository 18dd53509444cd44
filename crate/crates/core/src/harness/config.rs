use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, DEFAULT_BURN_IN};
use crate::series::check_level;

pub const DEFAULT_FACTOR_BUDGET: usize = 100_000;

/// A column of a delimited file, by zero-based position or header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(s) => f.write_str(s),
        }
    }
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DataSource {
    Model {
        model: ModelSpec,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    File {
        file: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        column: Option<ColumnSelector>,
        /// Remove a least-squares linear trend before estimation.
        #[serde(default)]
        detrend: bool,
    },
}

fn one() -> usize {
    1
}

/// The numbers of upper order statistics to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum KGrid {
    Counts(Vec<usize>),
    /// `k = round(f n)`, at least 1.
    Fractions { fractions: Vec<f64> },
    /// `start, start + step, …` up to and including `end`.
    Range {
        start: usize,
        end: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

impl KGrid {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let ks: Vec<usize> = match self {
            KGrid::Counts(ks) => ks.clone(),
            KGrid::Fractions { fractions } => {
                if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
                    return Err(Error::param("k_grid", format!("fraction {f} outside (0, 1)")));
                }
                fractions
                    .iter()
                    .map(|f| ((f * n as f64).round() as usize).max(1))
                    .collect()
            }
            KGrid::Range { start, end, step } => {
                if *step == 0 || start > end {
                    return Err(Error::param("k_grid", "need step >= 1 and start <= end"));
                }
                (*start..=*end).step_by(*step).collect()
            }
        };
        if ks.is_empty() {
            return Err(Error::param("k_grid", "no values of k"));
        }
        if let Some(&k) = ks.iter().find(|&&k| k == 0 || k >= n) {
            return Err(Error::RankOutOfRange { k, n });
        }
        Ok(ks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    /// Variance factor from the model's spectral law, once per lag.
    #[default]
    TrueParams,
    /// Variance factor with `(α̂, κ̂)` plugged in, once per row.
    PlugIn,
}

impl FromStr for FactorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true_params" | "true-params" => Ok(FactorMode::TrueParams),
            "plug_in" | "plug-in" => Ok(FactorMode::PlugIn),
            other => Err(Error::param(
                "factor_mode",
                format!("expected `true_params` or `plug_in`, got `{other}`"),
            )),
        }
    }
}

fn default_level() -> f64 {
    0.95
}

fn default_budget() -> usize {
    DEFAULT_FACTOR_BUDGET
}

/// Declarative description of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub source: DataSource,
    pub lags: Vec<usize>,
    pub k_grid: KGrid,
    /// Sample size for simulated sources; ignored for files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "one")]
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub ci_level: f64,
    #[serde(default)]
    pub factor_mode: FactorMode,
    /// Monte Carlo draws per variance factor.
    #[serde(default = "default_budget")]
    pub factor_budget: usize,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::param("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn model(&self) -> Option<ModelSpec> {
        match self.source {
            DataSource::Model { model, .. } => Some(model),
            DataSource::File { .. } => None,
        }
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.lags.is_empty() {
            return Err(Error::param("lags", "need at least one lag"));
        }
        if self.lags.contains(&0) {
            return Err(Error::param("lags", "lags must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications", "need at least one replication"));
        }
        if self.factor_budget == 0 {
            return Err(Error::param("factor_budget", "need at least one draw"));
        }
        check_level(self.ci_level)?;
        match &self.source {
            DataSource::Model { model, .. } => {
                model.validate()?;
                let n = self
                    .n
                    .ok_or_else(|| Error::param("n", "required for a simulated source"))?;
                if n < 2 {
                    return Err(Error::param("n", "need at least two observations"));
                }
                self.k_grid.resolve(n)?;
            }
            DataSource::File { .. } => {
                if self.replications != 1 {
                    return Err(Error::param(
                        "replications",
                        "a file source has exactly one replication",
                    ));
                }
                if self.factor_mode == FactorMode::TrueParams {
                    return Err(Error::param(
                        "factor_mode",
                        "true_params needs a model source; use plug_in for data",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_config_with_defaults() {
        let cfg = StudyConfig::from_json(
            r#"{"source": {"model": {"name": "expar", "phi": 0.5, "alpha": 4}},
                "lags": [1, 2, 3], "k_grid": {"fractions": [0.05, 0.1, 0.2]},
                "n": 500, "replications": 1000, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.ci_level, 0.95);
        assert_eq!(cfg.factor_mode, FactorMode::TrueParams);
        assert_eq!(cfg.factor_budget, DEFAULT_FACTOR_BUDGET);
        assert_eq!(
            cfg.source,
            DataSource::Model {
                model: ModelSpec::Expar { phi: 0.5, alpha: 4.0 },
                burn_in: DEFAULT_BURN_IN
            }
        );
        assert_eq!(cfg.k_grid.resolve(500).unwrap(), vec![25, 50, 100]);
        cfg.validate().unwrap();
        let back = StudyConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parses_file_config() {
        let cfg = StudyConfig::from_json(
            r#"{"source": {"file": "x.csv", "column": "volume", "detrend": true},
                "lags": [1], "k_grid": [10, 20], "seed": 1, "factor_mode": "plug_in"}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.source,
            DataSource::File { column: Some(ColumnSelector::Name(_)), detrend: true, .. }
        ));
        cfg.validate().unwrap();
        let mut bad = cfg.clone();
        bad.factor_mode = FactorMode::TrueParams;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn k_grid_forms() {
        assert_eq!(KGrid::Fractions { fractions: vec![0.001] }.resolve(100).unwrap(), vec![1]);
        assert_eq!(KGrid::Fractions { fractions: vec![0.025] }.resolve(500).unwrap(), vec![13]);
        assert_eq!(
            KGrid::Range { start: 10, end: 30, step: 10 }.resolve(500).unwrap(),
            vec![10, 20, 30]
        );
        assert!(KGrid::Counts(vec![500]).resolve(500).is_err());
        assert!(KGrid::Counts(vec![0]).resolve(500).is_err());
        assert!(KGrid::Counts(vec![]).resolve(500).is_err());
        assert!(KGrid::Range { start: 5, end: 1, step: 1 }.resolve(500).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let base = r#""lags": [1], "k_grid": [10], "n": 100, "seed": 1"#;
        let parse = |extra: &str| {
            StudyConfig::from_json(&format!(
                r#"{{"source": {{"model": {{"name": "iid_pareto", "alpha": 2}}}}, {base}{extra}}}"#
            ))
        };
        parse("").unwrap().validate().unwrap();
        assert!(parse(r#", "replications": 0"#).unwrap().validate().is_err());
        assert!(parse(r#", "ci_level": 1.5"#).unwrap().validate().is_err());
        assert!(parse(r#", "bogus": 1"#).is_err());
        let mut no_n = parse("").unwrap();
        no_n.n = None;
        assert!(no_n.validate().is_err());
    }

    #[test]
    fn column_selector_from_str() {
        assert_eq!("2".parse::<ColumnSelector>().unwrap(), ColumnSelector::Index(2));
        assert_eq!(
            "close".parse::<ColumnSelector>().unwrap(),
            ColumnSelector::Name("close".into())
        );
    }
}
