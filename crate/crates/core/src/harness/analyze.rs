use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{check_level, Series};

use super::config::FactorMode;
use super::detrend::detrend_linear;
use super::study::{estimate_series, CurvePoint, Plan, RowError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub lags: Vec<usize>,
    pub ks: Vec<usize>,
    pub level: f64,
    pub detrend: bool,
    pub factor_budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: Option<String>,
    pub n: usize,
    pub options: AnalysisOptions,
    pub points: Vec<CurvePoint>,
    pub errors: Vec<RowError>,
}

/// Data pipeline: optional linear detrending, then Hill, tail index and
/// scaling exponent curves over `k` with plug-in intervals.
pub fn analyze_series(series: &Series<f64>, options: &AnalysisOptions) -> Result<AnalysisReport> {
    check_level(options.level)?;
    if options.lags.is_empty() || options.lags.contains(&0) {
        return Err(Error::param("lags", "need one or more lags, each at least 1"));
    }
    if options.ks.is_empty() {
        return Err(Error::param("k", "need at least one value of k"));
    }
    if let Some(&k) = options.ks.iter().find(|&&k| k == 0 || k >= series.len()) {
        return Err(Error::RankOutOfRange { k, n: series.len() });
    }
    if options.factor_budget == 0 {
        return Err(Error::param("factor_budget", "need at least one draw"));
    }
    let data = if options.detrend {
        detrend_linear(series)?
    } else {
        series.clone()
    };
    let plan = Plan {
        lags: &options.lags,
        ks: &options.ks,
        level: options.level,
        mode: FactorMode::PlugIn,
        budget: options.factor_budget,
        seed: options.seed,
        true_factors: None,
        want_curves: true,
    };
    let out = estimate_series(&data, 0, &plan);
    Ok(AnalysisReport {
        name: series.name().map(str::to_string),
        n: series.len(),
        options: options.clone(),
        points: out.curves,
        errors: out.errors,
    })
}
