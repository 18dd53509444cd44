use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{alpha_ci, hill_ci, kappa_ci, kappa_components, scaling_estimate};
use crate::limits::{empirical_quantile, spectral_pareto, variance_factor, variance_factor_with};
use crate::models::{ModelTruth, TruthSummary};
use crate::rng::{self, domain};
use crate::series::Series;

use super::config::{DataSource, FactorMode, StudyConfig};
use super::detrend::detrend_linear;
use super::float;
use super::io::load_series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Curves,
    Boxplot,
    Coverage,
}

/// One `(replicate, k, h)` estimate. The interval is for `κ_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub replicate: usize,
    pub k: usize,
    pub h: usize,
    #[serde(with = "float")]
    pub gamma: f64,
    #[serde(with = "float")]
    pub gamma_h: f64,
    #[serde(with = "float")]
    pub kappa: f64,
    #[serde(with = "float")]
    pub ci_low: f64,
    #[serde(with = "float")]
    pub ci_high: f64,
    #[serde(with = "float")]
    pub b_hat: f64,
}

/// A `(replicate, k, h)` cell that could not be estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub replicate: usize,
    pub k: usize,
    pub h: usize,
    pub code: String,
    pub message: String,
}

impl RowError {
    fn new(replicate: usize, k: usize, h: usize, e: &Error) -> Self {
        RowError {
            replicate,
            k,
            h,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Hill and scaling exponent estimates at one `(k, h)` with every interval
/// that can be formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub replicate: usize,
    pub k: usize,
    pub h: usize,
    #[serde(with = "float")]
    pub gamma: f64,
    #[serde(with = "float")]
    pub gamma_low: f64,
    #[serde(with = "float")]
    pub gamma_high: f64,
    #[serde(with = "float")]
    pub alpha: f64,
    #[serde(with = "float")]
    pub alpha_low: f64,
    #[serde(with = "float")]
    pub alpha_high: f64,
    #[serde(with = "float")]
    pub gamma_h: f64,
    #[serde(with = "float")]
    pub kappa: f64,
    #[serde(with = "float::option", default)]
    pub kappa_low_true: Option<f64>,
    #[serde(with = "float::option", default)]
    pub kappa_high_true: Option<f64>,
    #[serde(with = "float")]
    pub factor_plug_in: f64,
    #[serde(with = "float")]
    pub kappa_low_plug_in: f64,
    #[serde(with = "float")]
    pub kappa_high_plug_in: f64,
    #[serde(with = "float")]
    pub b_hat: f64,
}

/// Distribution of `κ̂_h` over replicates at one `(k, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub k: usize,
    pub h: usize,
    pub count: usize,
    pub failed: usize,
    #[serde(with = "float::option", default)]
    pub true_kappa: Option<f64>,
    #[serde(with = "float::option", default)]
    pub median: Option<f64>,
    #[serde(with = "float::option", default)]
    pub q1: Option<f64>,
    #[serde(with = "float::option", default)]
    pub q3: Option<f64>,
    #[serde(with = "float::option", default)]
    pub mean: Option<f64>,
    #[serde(with = "float::option", default)]
    pub median_gamma: Option<f64>,
    /// Share of replicates whose `κ_h` interval covers the truth.
    #[serde(with = "float::option", default)]
    pub coverage_kappa: Option<f64>,
    /// Share of replicates whose Hill interval covers `1/α`.
    #[serde(with = "float::option", default)]
    pub coverage_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagFactor {
    pub h: usize,
    #[serde(with = "float")]
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudySummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<StudyKind>,
    pub groups: Vec<GroupSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurvePoint>,
    /// True-parameter variance factors, one per lag.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<LagFactor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthSummary>,
    /// Set when the product-based estimator of `κ_h` is known not to apply.
    #[serde(default)]
    pub out_of_method: bool,
    /// Number of failed `(replicate, k, h)` cells.
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub summary: StudySummary,
    pub errors: Vec<RowError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl StudyResult {
    pub fn empty(config: StudyConfig) -> Self {
        StudyResult {
            config,
            rows: Vec::new(),
            summary: StudySummary::default(),
            errors: Vec::new(),
            timestamp: None,
        }
    }
}

/// Everything needed to turn one series into rows.
pub(crate) struct Plan<'a> {
    pub lags: &'a [usize],
    pub ks: &'a [usize],
    pub level: f64,
    pub mode: FactorMode,
    pub budget: usize,
    pub seed: u64,
    /// True-parameter factor per lag, aligned with `lags`.
    pub true_factors: Option<&'a [f64]>,
    pub want_curves: bool,
}

#[derive(Default)]
pub(crate) struct SeriesOutput {
    pub rows: Vec<StudyRow>,
    pub curves: Vec<CurvePoint>,
    pub errors: Vec<RowError>,
}

fn plug_in_factor(gamma: f64, kappa: f64, budget: usize, seed: u64, index: u64) -> Result<f64> {
    let model = spectral_pareto(1.0 / gamma, kappa, 1)?;
    let mut rng = rng::stream(seed, domain::PLUG_IN, index);
    variance_factor_with(&model, budget, &mut rng)
}

pub(crate) fn estimate_series(series: &Series<f64>, replicate: usize, plan: &Plan) -> SeriesOutput {
    let mut out = SeriesOutput::default();
    let n_k = plan.ks.len() as u64;
    let n_h = plan.lags.len() as u64;
    for (ki, &k) in plan.ks.iter().enumerate() {
        for (hi, &h) in plan.lags.iter().enumerate() {
            let index = (replicate as u64 * n_k + ki as u64) * n_h + hi as u64;
            match estimate_cell(series, replicate, k, hi, h, index, plan) {
                Ok((row, curve)) => {
                    out.rows.push(row);
                    out.curves.extend(curve);
                }
                Err(e) => out.errors.push(RowError::new(replicate, k, h, &e)),
            }
        }
    }
    out
}

fn estimate_cell(
    series: &Series<f64>,
    replicate: usize,
    k: usize,
    hi: usize,
    h: usize,
    index: u64,
    plan: &Plan,
) -> Result<(StudyRow, Option<CurvePoint>)> {
    let c = kappa_components(series, h, k)?;
    let b_hat = scaling_estimate(series, h, k)?;
    let true_factor = plan.true_factors.map(|f| f[hi]);
    let plug_in = if plan.mode == FactorMode::PlugIn || plan.want_curves {
        Some(plug_in_factor(c.gamma, c.kappa, plan.budget, plan.seed, index)?)
    } else {
        None
    };
    let factor = match plan.mode {
        FactorMode::TrueParams => true_factor.unwrap_or(f64::INFINITY),
        FactorMode::PlugIn => plug_in.expect("computed for plug-in mode"),
    };
    let ci = kappa_ci(c.kappa, k, factor, plan.level)?;
    let row = StudyRow {
        replicate,
        k,
        h,
        gamma: c.gamma,
        gamma_h: c.gamma_h,
        kappa: c.kappa,
        ci_low: ci.ci_low,
        ci_high: ci.ci_high,
        b_hat,
    };
    let curve = if plan.want_curves {
        let g = hill_ci(c.gamma, k, plan.level)?;
        let a = alpha_ci(c.gamma, k, plan.level)?;
        let factor_plug_in = plug_in.expect("computed for curves");
        let p = kappa_ci(c.kappa, k, factor_plug_in, plan.level)?;
        let t = true_factor
            .map(|f| kappa_ci(c.kappa, k, f, plan.level))
            .transpose()?;
        Some(CurvePoint {
            replicate,
            k,
            h,
            gamma: c.gamma,
            gamma_low: g.ci_low,
            gamma_high: g.ci_high,
            alpha: a.value,
            alpha_low: a.ci_low,
            alpha_high: a.ci_high,
            gamma_h: c.gamma_h,
            kappa: c.kappa,
            kappa_low_true: t.as_ref().map(|t| t.ci_low),
            kappa_high_true: t.as_ref().map(|t| t.ci_high),
            factor_plug_in,
            kappa_low_plug_in: p.ci_low,
            kappa_high_plug_in: p.ci_high,
            b_hat,
        })
    } else {
        None
    };
    Ok((row, curve))
}

fn quartiles(mut v: Vec<f64>) -> Option<(f64, f64, f64)> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    Some((
        empirical_quantile(&v, 0.25),
        empirical_quantile(&v, 0.5),
        empirical_quantile(&v, 0.75),
    ))
}

/// Per-`(k, h)` summaries over replicates, in `k_grid` then `lags` order.
pub fn summarize(
    rows: &[StudyRow],
    errors: &[RowError],
    ks: &[usize],
    lags: &[usize],
    truth: Option<&ModelTruth>,
    level: f64,
) -> Result<Vec<GroupSummary>> {
    let mut groups = Vec::with_capacity(ks.len() * lags.len());
    for &k in ks {
        for &h in lags {
            let cell: Vec<&StudyRow> = rows.iter().filter(|r| r.k == k && r.h == h).collect();
            let failed = errors.iter().filter(|e| e.k == k && e.h == h).count();
            let kappas: Vec<f64> = cell.iter().map(|r| r.kappa).collect();
            let gammas: Vec<f64> = cell.iter().map(|r| r.gamma).collect();
            let quart = quartiles(kappas.clone());
            let count = cell.len();
            let share = |hits: usize| (count > 0).then(|| hits as f64 / count as f64);
            let true_kappa = truth.map(|t| t.kappa(h));
            let coverage_kappa = true_kappa
                .and_then(|tk| share(cell.iter().filter(|r| r.ci_low <= tk && tk <= r.ci_high).count()));
            let coverage_gamma = match truth {
                Some(t) => {
                    let mut hits = 0;
                    for r in &cell {
                        if r.gamma > 0.0 && hill_ci(r.gamma, k, level)?.covers(t.gamma()) {
                            hits += 1;
                        }
                    }
                    share(hits)
                }
                None => None,
            };
            groups.push(GroupSummary {
                k,
                h,
                count,
                failed,
                true_kappa,
                median: quart.map(|q| q.1),
                q1: quart.map(|q| q.0),
                q3: quart.map(|q| q.2),
                mean: (count > 0).then(|| kappas.iter().sum::<f64>() / count as f64),
                median_gamma: quartiles(gammas).map(|q| q.1),
                coverage_kappa,
                coverage_gamma,
            });
        }
    }
    Ok(groups)
}

fn load_source(config: &StudyConfig) -> Result<Option<Series<f64>>> {
    match &config.source {
        DataSource::File {
            file,
            column,
            detrend,
        } => {
            let s = load_series(file, column.as_ref())?;
            Ok(Some(if *detrend { detrend_linear(&s)? } else { s }))
        }
        DataSource::Model { .. } => Ok(None),
    }
}

fn run_study(config: &StudyConfig, kind: StudyKind) -> Result<StudyResult> {
    config.validate()?;
    let data = load_source(config)?;
    let n = match &data {
        Some(s) => s.len(),
        None => config.n.expect("validated"),
    };
    let ks = config.k_grid.resolve(n)?;
    let truth = config.model().map(|m| m.truth());
    let mut notes = Vec::new();

    let true_factors: Option<Vec<f64>> = match (&truth, config.factor_mode) {
        (Some(t), _) => {
            let mut f = Vec::with_capacity(config.lags.len());
            for &h in &config.lags {
                f.push(match t.spectral(h)? {
                    Some(m) => variance_factor(&m, config.factor_budget, config.seed)?,
                    None => {
                        if config.factor_mode == FactorMode::TrueParams {
                            notes.push(format!(
                                "no spectral law is known for {} at lag {h}; true-parameter intervals are unbounded",
                                t.spec()
                            ));
                        }
                        f64::INFINITY
                    }
                });
            }
            Some(f)
        }
        (None, _) => None,
    };
    let out_of_method = truth.is_some_and(|t| !t.product_method_applicable());
    if out_of_method {
        notes.push(
            "the lagged products of this model do not carry the scaling exponent; \
             estimates of kappa are not expected to be consistent"
                .into(),
        );
    }

    let plan = Plan {
        lags: &config.lags,
        ks: &ks,
        level: config.ci_level,
        mode: config.factor_mode,
        budget: config.factor_budget,
        seed: config.seed,
        true_factors: true_factors.as_deref(),
        want_curves: kind == StudyKind::Curves,
    };

    let outputs: Vec<Result<SeriesOutput>> = match (&data, &config.source) {
        (Some(s), _) => vec![Ok(estimate_series(s, 0, &plan))],
        (None, DataSource::Model { model, burn_in }) => (0..config.replications)
            .into_par_iter()
            .map(|r| {
                let (s, _) = model.simulate(n, *burn_in, config.seed, r as u64)?;
                Ok(estimate_series(&s, r, &plan))
            })
            .collect(),
        (None, DataSource::File { .. }) => unreachable!("file sources are loaded"),
    };

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut errors = Vec::new();
    for o in outputs {
        let o = o?;
        rows.extend(o.rows);
        curves.extend(o.curves);
        errors.extend(o.errors);
    }
    let groups = summarize(&rows, &errors, &ks, &config.lags, truth.as_ref(), config.ci_level)?;
    let summary = StudySummary {
        kind: Some(kind),
        groups,
        curves,
        factors: true_factors
            .map(|f| {
                config
                    .lags
                    .iter()
                    .zip(f)
                    .map(|(&h, factor)| LagFactor { h, factor })
                    .collect()
            })
            .unwrap_or_default(),
        truth: truth.map(|t| t.summary(&config.lags)),
        out_of_method,
        failed: errors.len(),
        notes,
    };
    Ok(StudyResult {
        config: config.clone(),
        rows,
        summary,
        errors,
        timestamp: None,
    })
}

/// Hill and scaling exponent curves over `k`, with Hill, tail index and both
/// kinds of `κ_h` intervals in the summary.
pub fn run_hill_kappa_curves(config: &StudyConfig) -> Result<StudyResult> {
    run_study(config, StudyKind::Curves)
}

/// `κ̂_h` over many replicates at a few values of `k`.
pub fn run_boxplot_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.replications < 2 {
        return Err(Error::param("replications", "a boxplot study needs at least two"));
    }
    run_study(config, StudyKind::Boxplot)
}

/// Empirical coverage of the Hill and `κ_h` intervals.
pub fn run_coverage_study(config: &StudyConfig) -> Result<StudyResult> {
    if config.model().is_none() {
        return Err(Error::MissingCapability(
            "coverage needs a model source with known truth".into(),
        ));
    }
    run_study(config, StudyKind::Coverage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::KGrid;
    use crate::models::ModelSpec;

    fn config(model: ModelSpec, n: usize, ks: Vec<usize>, lags: Vec<usize>, reps: usize) -> StudyConfig {
        StudyConfig {
            source: DataSource::Model { model, burn_in: 1000 },
            lags,
            k_grid: KGrid::Counts(ks),
            n: Some(n),
            replications: reps,
            seed: 3,
            ci_level: 0.95,
            factor_mode: FactorMode::TrueParams,
            factor_budget: 20_000,
        }
    }

    #[test]
    fn row_layout_and_interval_order() {
        let cfg = config(ModelSpec::Expar { phi: 0.5, alpha: 4.0 }, 500, vec![25, 50], vec![1, 2], 4);
        let res = run_boxplot_study(&cfg).unwrap();
        assert_eq!(res.rows.len(), 4 * 2 * 2);
        assert!(res.errors.is_empty());
        for r in &res.rows {
            assert!(r.ci_low <= r.kappa && r.kappa <= r.ci_high);
        }
        let keys: Vec<_> = res.rows.iter().map(|r| (r.replicate, r.k, r.h)).collect();
        assert_eq!(keys[..4], [(0, 25, 1), (0, 25, 2), (0, 50, 1), (0, 50, 2)]);
        assert_eq!(res.summary.groups.len(), 4);
        assert!(res.summary.groups.iter().all(|g| g.count == 4));
        assert!(!res.summary.out_of_method);
    }

    #[test]
    fn true_params_half_width() {
        let cfg = config(ModelSpec::Expar { phi: 0.5, alpha: 2.0 }, 500, vec![40, 100], vec![1], 1);
        let res = run_hill_kappa_curves(&cfg).unwrap();
        let factor = res.summary.factors[0].factor;
        assert!((factor - 2.0).abs() < 0.1, "{factor}");
        for r in &res.rows {
            let half = 0.5 * (r.ci_high - r.ci_low);
            let z = crate::estimators::normal_quantile(0.95).unwrap();
            let expected = z * (1.0 + r.kappa) * factor.sqrt() / (r.k as f64).sqrt();
            assert!((half - expected).abs() < 1e-12);
        }
        assert_eq!(res.summary.curves.len(), 2);
        let c = &res.summary.curves[0];
        assert!(c.kappa_low_true.is_some());
        assert!(c.gamma_low <= c.gamma && c.gamma <= c.gamma_high);
    }

    #[test]
    fn boxplot_needs_two_replicates() {
        let cfg = config(ModelSpec::Expar { phi: 0.5, alpha: 4.0 }, 500, vec![25], vec![1], 1);
        assert!(run_boxplot_study(&cfg).is_err());
    }

    #[test]
    fn single_row_quartiles_collapse() {
        let row = StudyRow {
            replicate: 0,
            k: 10,
            h: 1,
            gamma: 0.5,
            gamma_h: 0.7,
            kappa: 0.4,
            ci_low: 0.1,
            ci_high: 0.7,
            b_hat: 1.0,
        };
        let g = &summarize(&[row], &[], &[10], &[1], None, 0.95).unwrap()[0];
        assert_eq!((g.q1, g.median, g.q3), (Some(0.4), Some(0.4), Some(0.4)));
        assert_eq!(g.coverage_kappa, None);
    }

    #[test]
    fn stochastic_volatility_is_flagged() {
        let cfg = config(ModelSpec::Sv { alpha: 2.0, ar_coeff: 0.5 }, 2000, vec![100], vec![1], 2);
        let res = run_coverage_study(&cfg).unwrap();
        assert!(res.summary.out_of_method);
        assert!(!res.summary.notes.is_empty());
        assert!(res.rows.iter().all(|r| r.ci_low.is_infinite()));
    }

    #[test]
    fn constant_data_is_recorded_as_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.txt");
        std::fs::write(&path, "3\n".repeat(50)).unwrap();
        let cfg = StudyConfig {
            source: DataSource::File { file: path, column: None, detrend: false },
            lags: vec![1],
            k_grid: KGrid::Counts(vec![5, 10]),
            n: None,
            replications: 1,
            seed: 1,
            ci_level: 0.95,
            factor_mode: FactorMode::PlugIn,
            factor_budget: 100,
        };
        let res = run_hill_kappa_curves(&cfg).unwrap();
        assert!(res.rows.is_empty());
        assert_eq!(res.errors.len(), 2);
        assert!(res.errors.iter().all(|e| e.code == "degenerate_hill"));
        assert_eq!(res.summary.failed, 2);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut cfg = config(ModelSpec::Expar { phi: 0.5, alpha: 4.0 }, 300, vec![15, 30], vec![1], 6);
        cfg.factor_mode = FactorMode::PlugIn;
        cfg.factor_budget = 500;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_boxplot_study(&cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
