use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cev_core::estimators::{alpha_ci, hill_ci, kappa_ci, kappa_components, scaling_estimate};
use cev_core::harness::{
    analyze_series, curves_to_csv, ks_grid, ks_statistic, load_series, run_boxplot_study,
    run_coverage_study, run_hill_kappa_curves, to_json, write_results, write_series,
    AnalysisOptions, ColumnSelector, ResultFormat, StudyConfig, StudyResult,
    DEFAULT_FACTOR_BUDGET, DEFAULT_KS_POINTS,
};
use cev_core::limits::{
    ks_critical_value, plug_in_variance_factor, spectral_sampler_expar, SpectralModel,
    TabulatedPsi, WLaw,
};
use cev_core::models::{ModelSpec, TruthSummary, DEFAULT_BURN_IN};
use cev_core::{conditional_cdf_hat, TailEstimate, TailSide};

#[derive(Parser)]
#[command(name = "cev", version, about = "Tail inference for time series with extremal independence")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CEV_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a series and write one value per line.
    #[command(subcommand)]
    Simulate(SimulateModel),
    /// Hill, scaling exponent, scaling function and conditional law at one (h, k).
    Estimate(EstimateArgs),
    /// Hill and scaling exponent curves over k.
    Curves(StudyArgs),
    /// Scaling exponent estimates over replicates.
    Boxplot(StudyArgs),
    /// Empirical coverage of the confidence intervals.
    Coverage(StudyArgs),
    /// Kolmogorov-Smirnov type test of the limiting conditional law.
    KsTest(KsArgs),
    /// Detrend a data column and estimate curves over k.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SimOut {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SimulateModel {
    /// Exponential AR(1).
    Expar {
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: usize,
        #[command(flatten)]
        out: SimOut,
    },
    /// Stochastic volatility with Pareto noise.
    Sv {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        ar: f64,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: usize,
        #[command(flatten)]
        out: SimOut,
    },
    /// i.i.d. Pareto.
    Pareto {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        out: SimOut,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    input: PathBuf,
    /// Column index (from 0) or header name.
    #[arg(long)]
    column: Option<ColumnSelector>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Absolute,
    Upper,
}

impl From<Side> for TailSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Absolute => TailSide::Absolute,
            Side::Upper => TailSide::Upper,
        }
    }
}

fn parse_level(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err("must lie strictly between 0 and 1".into())
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must be nonnegative".into())
    }
}

#[derive(Clone)]
struct Grid(Vec<f64>);

#[derive(Clone)]
struct List(Vec<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let g = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|y| y.is_nan()) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(Grid(g))
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    h: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
    #[arg(long, value_enum, default_value = "absolute")]
    tail_side: Side,
    /// Comma-separated points at which to report the conditional law.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Variance factor for the scaling exponent interval.
    #[arg(long, value_parser = parse_nonneg, conflicts_with = "seed")]
    factor: Option<f64>,
    /// Compute a plug-in variance factor with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_FACTOR_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    factor_budget: u64,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// JSON study configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; by default taken from the extension of --out.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record the wall-clock time in JSON output.
    #[arg(long)]
    timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ResultFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ResultFormat::Csv,
            Format::Json => ResultFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShippedModel {
    Expar,
}

#[derive(Args)]
struct KsArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    h: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Reference law from a shipped model.
    #[arg(long, value_enum, required_unless_present = "psi_table", conflicts_with = "psi_table", requires_all = ["phi", "alpha"])]
    model: Option<ShippedModel>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Reference law as a two-column table of (y, Ψ(y)).
    #[arg(long)]
    psi_table: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(100..))]
    paths: u64,
    #[arg(long, default_value = "0.05", value_parser = parse_level)]
    level: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "absolute")]
    tail_side: Side,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list(s: &str) -> Result<List, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..=") {
            let a: usize = a.parse().map_err(|e| format!("`{part}`: {e}"))?;
            let b: usize = b.parse().map_err(|e| format!("`{part}`: {e}"))?;
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|e| format!("`{part}`: {e}"))?);
        }
    }
    if out.contains(&0) {
        return Err("values must be at least 1".into());
    }
    Ok(List(out))
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: Input,
    /// Lags, e.g. `1,2,3`.
    #[arg(long, default_value = "1", value_parser = parse_list)]
    h: List,
    /// Values of k, e.g. `50,100` or `10..=200`.
    #[arg(long, value_parser = parse_list)]
    k: List,
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
    /// Skip the linear detrending step.
    #[arg(long)]
    no_detrend: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FACTOR_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    factor_budget: u64,
    /// Curves file; CSV for a `.csv` extension, JSON otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct SimulationRecord {
    n: u64,
    seed: u64,
    burn_in: usize,
    truth: TruthSummary,
}

fn cmd_simulate(model: SimulateModel) -> Result<()> {
    let (spec, burn_in, out) = match model {
        SimulateModel::Expar { phi, alpha, burn_in, out } => (ModelSpec::Expar { phi, alpha }, burn_in, out),
        SimulateModel::Sv { alpha, ar, burn_in, out } => (ModelSpec::Sv { alpha, ar_coeff: ar }, burn_in, out),
        SimulateModel::Pareto { alpha, out } => (ModelSpec::IidPareto { alpha }, 0, out),
    };
    spec.validate().map_err(Usage)?;
    let (series, truth) = spec.simulate(out.n as usize, burn_in, out.seed, 0)?;
    write_series(&series, &out.out)?;
    let record = SimulationRecord {
        n: out.n,
        seed: out.seed,
        burn_in,
        truth: truth.summary(&[1, 2, 3]),
    };
    let mut sidecar = out.out.clone().into_os_string();
    sidecar.push(".truth.json");
    write_file(Path::new(&sidecar), &to_json(&record))?;
    println!("wrote {} values of {} to {}", series.len(), spec, out.out.display());
    Ok(())
}

#[derive(Serialize)]
struct PsiRow {
    y: f64,
    psi: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    h: usize,
    k: usize,
    level: f64,
    tail_side: TailSide,
    gamma: TailEstimate<f64>,
    alpha: TailEstimate<f64>,
    gamma_h: f64,
    kappa: f64,
    kappa_ci: Option<TailEstimate<f64>>,
    variance_factor: Option<f64>,
    b_hat: f64,
    psi_hat: Vec<PsiRow>,
}

fn fmt_interval(e: &TailEstimate<f64>) -> String {
    format!("{:.6}  [{:.6}, {:.6}]", e.value, e.ci_low, e.ci_high)
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let series = load_series(&a.input.input, a.input.column.as_ref())?;
    let (h, k) = (a.h as usize, a.k as usize);
    let n = series.len();
    if k >= n {
        bail!(Usage(cev_core::Error::RankOutOfRange { k, n }));
    }
    let side: TailSide = a.tail_side.into();
    let c = kappa_components(&series, h, k)?;
    let gamma = hill_ci(c.gamma, k, a.level)?;
    let alpha = alpha_ci(c.gamma, k, a.level)?;
    let b_hat = scaling_estimate(&series, h, k)?;
    let factor = match (a.factor, a.seed) {
        (Some(f), _) => Some(f),
        (None, Some(seed)) => Some(plug_in_variance_factor(
            1.0 / c.gamma,
            c.kappa,
            a.factor_budget as usize,
            seed,
        )?),
        (None, None) => None,
    };
    let kappa = factor.map(|f| kappa_ci(c.kappa, k, f, a.level)).transpose()?;
    let grid = a
        .grid
        .map(|g| g.0)
        .unwrap_or_else(|| (1..=30).map(|i| 0.1 * i as f64).collect());
    let cdf = conditional_cdf_hat(&series, h, k, &grid, side)?;
    let report = EstimateReport {
        n,
        h,
        k,
        level: a.level,
        tail_side: side,
        gamma: gamma.clone(),
        alpha: alpha.clone(),
        gamma_h: c.gamma_h,
        kappa: c.kappa,
        kappa_ci: kappa.clone(),
        variance_factor: factor,
        b_hat,
        psi_hat: cdf
            .grid
            .iter()
            .zip(&cdf.probs)
            .map(|(&y, &psi)| PsiRow { y, psi })
            .collect(),
    };

    let mut text = String::new();
    writeln!(text, "n = {n}, h = {h}, k = {k}, level = {}", a.level)?;
    writeln!(text, "gamma    {}", fmt_interval(&gamma))?;
    writeln!(text, "alpha    {}", fmt_interval(&alpha))?;
    writeln!(text, "gamma_h  {:.6}", c.gamma_h)?;
    match &kappa {
        Some(ci) => writeln!(text, "kappa    {}  (factor {:.6})", fmt_interval(ci), factor.unwrap_or(0.0))?,
        None => writeln!(text, "kappa    {:.6}  (pass --factor or --seed for an interval)", c.kappa)?,
    }
    writeln!(text, "b_hat    {b_hat:.6}")?;
    writeln!(text, "y         psi_hat")?;
    for r in &report.psi_hat {
        writeln!(text, "{:<9.4} {:.6}", r.y, r.psi)?;
    }
    print!("{text}");
    if let Some(out) = &a.out {
        write_file(out, &to_json(&report))?;
    }
    Ok(())
}

fn cmd_study(a: StudyArgs, run: fn(&StudyConfig) -> cev_core::Result<StudyResult>) -> Result<()> {
    let mut config = StudyConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    config.validate().map_err(Usage)?;
    let mut result = run(&config).map_err(|e| match e {
        e @ cev_core::Error::InvalidParameter { .. } => anyhow::Error::new(Usage(e)),
        e => e.into(),
    })?;
    if a.timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
        result.timestamp = Some(format!("unix:{secs}"));
    }
    for g in &result.summary.groups {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "k={:<5} h={:<2} n={:<5} failed={:<3} median={} q1={} q3={} cover_kappa={} cover_gamma={}",
            g.k,
            g.h,
            g.count,
            g.failed,
            f(g.median),
            f(g.q1),
            f(g.q3),
            f(g.coverage_kappa),
            f(g.coverage_gamma)
        );
    }
    for note in &result.summary.notes {
        println!("note: {note}");
    }
    if let Some(out) = &a.out {
        let format = a.format.map(Into::into).unwrap_or_else(|| ResultFormat::from_path(out));
        write_results(&result, out, format)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct KsOutput {
    h: usize,
    k: usize,
    level: f64,
    paths: u64,
    grid_points: usize,
    statistic: f64,
    critical_value: f64,
    reject: bool,
}

fn cmd_ks(a: KsArgs) -> Result<()> {
    let (h, k) = (a.h as usize, a.k as usize);
    let model: SpectralModel = match (&a.model, &a.psi_table) {
        (Some(ShippedModel::Expar), _) => {
            let (phi, alpha) = (a.phi.expect("required by clap"), a.alpha.expect("required by clap"));
            let m = spectral_sampler_expar(phi, alpha, h).map_err(Usage)?;
            if !m.has_psi() {
                bail!("the conditional law of this model needs alpha > 1 to be normalized");
            }
            m
        }
        (None, Some(table)) => {
            let ys = load_series(table, Some(&ColumnSelector::Index(0)))?;
            let ps = load_series(table, Some(&ColumnSelector::Index(1)))?;
            let psi = TabulatedPsi::new(ys.into_values(), ps.into_values())?;
            // only Ψ enters the limit process
            SpectralModel::new(1.0, 0.0, h, WLaw::Constant(1.0))?.with_psi(Arc::new(psi))
        }
        _ => unreachable!("clap enforces exactly one reference"),
    };
    let series = load_series(&a.input.input, a.input.column.as_ref())?;
    if k >= series.len() {
        bail!(Usage(cev_core::Error::RankOutOfRange { k, n: series.len() }));
    }
    let psi = model.psi()?;
    let grid = ks_grid(psi, DEFAULT_KS_POINTS)?;
    let statistic = ks_statistic(&series, h, k, psi, &grid, a.tail_side.into())?;
    let critical_value = ks_critical_value(&model, a.level, a.paths as usize, &grid, a.seed)?;
    let out = KsOutput {
        h,
        k,
        level: a.level,
        paths: a.paths,
        grid_points: grid.len(),
        statistic,
        critical_value,
        reject: statistic > critical_value,
    };
    println!("statistic       {statistic:.6}");
    println!("critical value  {critical_value:.6}  (level {}, {} paths)", a.level, a.paths);
    println!("{}", if out.reject { "reject" } else { "accept" });
    if let Some(path) = &a.out {
        write_file(path, &to_json(&out))?;
    }
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let series = load_series(&a.input.input, a.input.column.as_ref())?;
    if let Some(&k) = a.k.0.iter().find(|&&k| k >= series.len()) {
        bail!(Usage(cev_core::Error::RankOutOfRange { k, n: series.len() }));
    }
    let options = AnalysisOptions {
        lags: a.h.0,
        ks: a.k.0,
        level: a.level,
        detrend: !a.no_detrend,
        factor_budget: a.factor_budget as usize,
        seed: a.seed,
    };
    let report = analyze_series(&series, &options)?;
    println!(
        "{} values{}",
        report.n,
        if options.detrend { ", linear trend removed" } else { "" }
    );
    println!("k      h  gamma     alpha     kappa     kappa_low  kappa_high");
    for p in &report.points {
        println!(
            "{:<6} {:<2} {:<9.4} {:<9.4} {:<9.4} {:<10.4} {:.4}",
            p.k, p.h, p.gamma, p.alpha, p.kappa, p.kappa_low_plug_in, p.kappa_high_plug_in
        );
    }
    for e in &report.errors {
        println!("k={} h={}: {}", e.k, e.h, e.message);
    }
    if let Some(out) = &a.out {
        let text = match ResultFormat::from_path(out) {
            ResultFormat::Csv => curves_to_csv(&report.points),
            ResultFormat::Json => to_json(&report),
        };
        write_file(out, &text)?;
    }
    Ok(())
}

/// Marks an error as a bad invocation rather than a runtime failure.
#[derive(Debug)]
struct Usage(cev_core::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for Usage {}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Simulate(m) => cmd_simulate(m),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Curves(a) => cmd_study(a, run_hill_kappa_curves),
        Command::Boxplot(a) => cmd_study(a, run_boxplot_study),
        Command::Coverage(a) => cmd_study(a, run_coverage_study),
        Command::KsTest(a) => cmd_ks(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
