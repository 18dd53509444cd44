//! Experiments and data handling: study configuration and execution,
//! ingestion and persistence, detrending and goodness-of-fit testing.

mod analyze;
mod config;
mod detrend;
mod float;
mod gof;
mod io;
mod study;

pub use analyze::{analyze_series, AnalysisOptions, AnalysisReport};
pub use config::{
    ColumnSelector, DataSource, FactorMode, KGrid, StudyConfig, DEFAULT_FACTOR_BUDGET,
};
pub use detrend::detrend_linear;
pub use gof::{ks_grid, ks_statistic, ks_test, KsReport, DEFAULT_KS_POINTS};
pub use io::{
    curves_to_csv, load_series, read_results, read_rows, rows_to_csv, to_json, write_results,
    write_series, ResultFormat, CSV_HEADER, CURVES_HEADER,
};
pub use study::{
    run_boxplot_study, run_coverage_study, run_hill_kappa_curves, summarize, CurvePoint,
    GroupSummary, LagFactor, RowError, StudyKind, StudyResult, StudyRow, StudySummary,
};
