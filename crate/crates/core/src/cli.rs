//! The `mfdfa` command-line application.
//!
//! Every command is first reduced to a [`RunManifest`]; execution depends
//! on the manifest alone, so `mfdfa rerun --manifest <file>` reproduces the
//! original JSON byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, Analysis};
use crate::csv_io::{prices_from_returns, read_price_csv_path, write_price_csv};
use crate::error::{MfdfaError, Result};
use crate::mfdfa::{log_spaced_scales, q_range, Direction, MfdfaConfig, DEFAULT_SCALE_COUNT};
use crate::series::{
    log_returns, sample_std, shuffle_surrogate, split_prices, threshold_exceedances,
    threshold_filter, PeriodSplit, Provenance, ReturnSeries,
};
use crate::spectrum::{ComparisonRow, ComparisonTable};
use crate::synth::{binomial_cascade, gaussian_iid, student_t_iid, CascadeSpec};

pub const TOOL_NAME: &str = "mfdfa";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "mfdfa", version, about = "Multifractal detrended fluctuation analysis of return series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// h(q), tau(q), f(alpha) and delta-alpha for each input and its shuffled surrogates.
    Analyze(AnalysisArgs),
    /// Before/after spectra around an excised window plus the difference table.
    Split(SplitArgs),
    /// Delta-alpha of threshold-filtered originals and surrogates for a list of k.
    ThresholdSweep(SweepArgs),
    /// Write a synthetic series in the ingestion CSV schema.
    Synth(SynthArgs),
    /// Re-execute a previous run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Input CSV (`date,rate`). Repeatable; `label=path` names the market.
    #[arg(long = "input", short = 'i', required = true)]
    pub inputs: Vec<String>,
    /// JSON file with engine settings (fields of the engine configuration).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Shuffled replicates per series.
    #[arg(long, default_value_t = 1)]
    pub surrogates: usize,
    #[arg(long)]
    pub scale_min: Option<usize>,
    #[arg(long)]
    pub scale_max: Option<usize>,
    #[arg(long)]
    pub scale_count: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_max: Option<f64>,
    #[arg(long)]
    pub q_step: Option<f64>,
    #[arg(long)]
    pub poly_order: Option<usize>,
    /// forward | both
    #[arg(long)]
    pub direction: Option<String>,
    /// Support dimension D_f in tau(q) = q h(q) - D_f.
    #[arg(long, default_value_t = 1.0)]
    pub support_dimension: f64,
    /// Timestamp recorded in the manifest (defaults to now, UTC).
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
    /// Calendar year removed between the two periods.
    #[arg(long, default_value_t = 1997)]
    pub excise_year: i32,
    /// Last date of period A (overrides --excise-year together with --post-start).
    #[arg(long, requires = "post_start")]
    pub pre_end: Option<NaiveDate>,
    /// First date of period B.
    #[arg(long, requires = "pre_end")]
    pub post_start: Option<NaiveDate>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
    /// Thresholds in units of the sample standard deviation.
    #[arg(long = "k", value_delimiter = ',', default_value = "2,3,4,6,8,10")]
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    Cascade,
    Gaussian,
    StudentT,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Cascade depth (length 2^levels).
    #[arg(long, default_value_t = 14)]
    pub levels: u32,
    /// Cascade multiplier.
    #[arg(long, default_value_t = 0.75)]
    pub a: f64,
    /// Length for the i.i.d. generators.
    #[arg(long, default_value_t = 16384)]
    pub n: usize,
    /// Student-t degrees of freedom.
    #[arg(long, default_value_t = 4.0)]
    pub dof: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Standard deviation of the emitted log returns.
    #[arg(long, default_value_t = 0.01)]
    pub volatility: f64,
    #[arg(long, default_value = "1991-01-01")]
    pub start: NaiveDate,
    #[arg(long, default_value_t = 100.0)]
    pub initial: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// File stem of the CSV (defaults to the generator kind).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Analyze,
    Split,
    ThresholdSweep,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSettings {
    pub kind: SynthKind,
    pub levels: u32,
    pub a: f64,
    pub n: usize,
    pub dof: f64,
    pub volatility: f64,
    pub start: NaiveDate,
    pub initial: f64,
    pub name: String,
}

/// Reproducibility envelope. Execution reads nothing but this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: CommandKind,
    pub inputs: Vec<InputRef>,
    pub config: MfdfaConfig,
    pub support_dimension: f64,
    pub seed: u64,
    pub surrogates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<PeriodSplit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSettings>,
    /// Settings left at their built-in defaults.
    pub defaults_used: Vec<String>,
    pub timestamp: String,
}

/// Optional engine settings read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub poly_order: Option<usize>,
    pub scales: Option<Vec<usize>>,
    pub min_scale: Option<usize>,
    pub max_scale: Option<usize>,
    pub scale_count: Option<usize>,
    pub q: Option<Vec<f64>>,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_step: Option<f64>,
    pub direction: Option<Direction>,
}

/// Resolves defaults, then the config file, then explicit flags.
pub fn resolve_config(args: &AnalysisArgs) -> Result<(MfdfaConfig, Vec<String>)> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| MfdfaError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| MfdfaError::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut cfg = MfdfaConfig::default();
    let mut defaults = Vec::new();

    match args.poly_order.or(file.poly_order) {
        Some(m) => cfg.poly_order = m,
        None => defaults.push(format!("poly_order={}", cfg.poly_order)),
    }
    match args.direction.as_deref() {
        Some(d) => cfg.direction = d.parse()?,
        None => match file.direction {
            Some(d) => cfg.direction = d,
            None => defaults.push("direction=both".to_string()),
        },
    }

    let scale_min = args.scale_min.or(file.min_scale);
    let scale_max = args.scale_max.or(file.max_scale);
    let scale_count = args.scale_count.or(file.scale_count);
    let explicit_grid = args.scale_min.is_none()
        && args.scale_max.is_none()
        && args.scale_count.is_none()
        && file.scales.is_some();
    if explicit_grid {
        let mut scales = file.scales.clone().unwrap_or_default();
        scales.sort_unstable();
        cfg.min_scale = scale_min.unwrap_or_else(|| scales.first().copied().unwrap_or(0));
        cfg.max_scale = scale_max.unwrap_or_else(|| scales.last().copied().unwrap_or(0));
        cfg.scales = scales;
    } else {
        if scale_min.is_none() && scale_max.is_none() && scale_count.is_none() {
            defaults.push(format!(
                "scales={} log-spaced in [{}, {}]",
                DEFAULT_SCALE_COUNT, cfg.min_scale, cfg.max_scale
            ));
        }
        cfg.min_scale = scale_min.unwrap_or(cfg.min_scale);
        cfg.max_scale = scale_max.unwrap_or(cfg.max_scale);
        let count = scale_count.unwrap_or(DEFAULT_SCALE_COUNT);
        cfg.scales = log_spaced_scales(cfg.min_scale, cfg.max_scale, count);
    }

    let q_min = args.q_min.or(file.q_min);
    let q_max = args.q_max.or(file.q_max);
    let q_step = args.q_step.or(file.q_step);
    if q_min.is_none() && q_max.is_none() && q_step.is_none() {
        match file.q {
            Some(q) => cfg.q = q,
            None => defaults.push("q=[-10, 10] step 0.5".to_string()),
        }
    } else {
        cfg.q = q_range(
            q_min.unwrap_or(crate::mfdfa::DEFAULT_Q_MIN),
            q_max.unwrap_or(crate::mfdfa::DEFAULT_Q_MAX),
            q_step.unwrap_or(crate::mfdfa::DEFAULT_Q_STEP),
        )?;
    }
    let cfg = cfg.normalized()?;
    if cfg.fit_scale_count() < 3 {
        return Err(MfdfaError::Config(format!(
            "fit window [{}, {}] holds {} scales; need at least 3",
            cfg.min_scale,
            cfg.max_scale,
            cfg.fit_scale_count()
        )));
    }
    Ok((cfg, defaults))
}

fn parse_input(spec: &str) -> InputRef {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => InputRef {
            label: label.to_string(),
            path: PathBuf::from(path),
        },
        _ => {
            let path = PathBuf::from(spec);
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            InputRef { label, path }
        }
    }
}

fn now_timestamp() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Builds the manifest for one of the analysis commands.
pub fn manifest_for(args: &AnalysisArgs, command: CommandKind) -> Result<RunManifest> {
    let (config, defaults_used) = resolve_config(args)?;
    if args.surrogates == 0 && command != CommandKind::Analyze {
        return Err(MfdfaError::Config(
            "this command needs at least one surrogate".into(),
        ));
    }
    let inputs: Vec<InputRef> = args.inputs.iter().map(|s| parse_input(s)).collect();
    let mut labels: Vec<&str> = inputs.iter().map(|i| i.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(MfdfaError::Config(
            "input labels must be unique (use label=path)".into(),
        ));
    }
    Ok(RunManifest {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        command,
        inputs,
        config,
        support_dimension: args.support_dimension,
        seed: args.seed,
        surrogates: args.surrogates,
        periods: None,
        thresholds: None,
        synth: None,
        defaults_used,
        timestamp: args.timestamp.clone().unwrap_or_else(now_timestamp),
    })
}

/// SplitMix64 step; derives independent replicate seeds from the master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One analysed series inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub label: String,
    pub provenance: Vec<Provenance>,
    pub delta_alpha: f64,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub unit: String,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketAnalysis {
    pub market: String,
    pub skipped_rows: usize,
    pub config: MfdfaConfig,
    pub original: Option<SeriesReport>,
    pub surrogates: Vec<SeriesReport>,
    pub surrogate_mean_delta_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub manifest: RunManifest,
    pub markets: Vec<MarketAnalysis>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub original: SeriesReport,
    pub surrogates: Vec<SeriesReport>,
    pub surrogate_mean_delta_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSplit {
    pub market: String,
    pub skipped_rows: usize,
    pub config: MfdfaConfig,
    pub length_a: usize,
    pub length_b: usize,
    pub whole: PeriodReport,
    pub period_a: PeriodReport,
    pub period_b: PeriodReport,
    pub row: ComparisonRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub manifest: RunManifest,
    pub markets: Vec<MarketSplit>,
    pub comparison: ComparisonTable,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k_sigma: f64,
    pub eliminated: usize,
    pub delta_alpha_original: f64,
    pub delta_alpha_surrogate: f64,
    pub surrogate_replicates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSweep {
    pub market: String,
    pub skipped_rows: usize,
    pub config: MfdfaConfig,
    pub unfiltered_delta_alpha: f64,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub manifest: RunManifest,
    pub markets: Vec<MarketSweep>,
    pub failures: Vec<Failure>,
}

/// Outcome of a command: the JSON document written and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub json_path: PathBuf,
    pub exit_code: i32,
    pub failures: Vec<Failure>,
}

fn failure(unit: String, e: &MfdfaError) -> Failure {
    Failure {
        unit,
        error: e.to_string(),
        exit_code: e.exit_code(),
    }
}

fn exit_code_of(failures: &[Failure]) -> i32 {
    failures.first().map_or(0, |f| f.exit_code)
}

fn load_returns(input: &InputRef) -> Result<(ReturnSeries, usize, crate::series::PriceSeries)> {
    let ing = read_price_csv_path(&input.path)?;
    let r = log_returns(&ing.prices)?;
    Ok((r, ing.skipped_rows, ing.prices))
}

fn check_variance(x: &ReturnSeries) -> Result<()> {
    if crate::series::is_constant(x.values()) {
        return Err(MfdfaError::ZeroVariance);
    }
    Ok(())
}

fn series_report(label: &str, x: &ReturnSeries, cfg: &MfdfaConfig, df: f64) -> Result<SeriesReport> {
    let analysis = analyze(x, cfg, df)?;
    Ok(SeriesReport {
        label: label.to_string(),
        provenance: x.provenance().to_vec(),
        delta_alpha: analysis.delta_alpha(),
        analysis,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| MfdfaError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| MfdfaError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| MfdfaError::Io(format!("{}: {e}", path.display())))
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Long-format TSVs of h, tau, spectrum and F_q(s) for a set of series.
fn write_series_tsvs(dir: &Path, market: &str, series: &[&SeriesReport]) -> Result<()> {
    let stem = file_label(market);
    let mut hurst = String::from("series\tq\th\th_stderr\tr_squared\n");
    let mut tau = String::from("series\tq\ttau\n");
    let mut spec = String::from("series\tq\talpha\tf_alpha\n");
    let mut fluct = String::from("series\tscale\tq\tF_q\n");
    for s in series {
        let a = &s.analysis;
        for ((q, h), fit) in a.hurst.q.iter().zip(&a.hurst.h).zip(&a.hurst.fits) {
            let _ = writeln!(hurst, "{}\t{q}\t{h}\t{}\t{}", s.label, fit.slope_stderr, fit.r_squared);
        }
        for (q, t) in a.tau.q.iter().zip(&a.tau.tau) {
            let _ = writeln!(tau, "{}\t{q}\t{t}", s.label);
        }
        for p in &a.spectrum.points {
            let _ = writeln!(spec, "{}\t{}\t{}\t{}", s.label, p.q, p.alpha, p.f);
        }
        for (i, scale) in a.surface.scales.iter().enumerate() {
            for (j, q) in a.surface.q.iter().enumerate() {
                let _ = writeln!(fluct, "{}\t{scale}\t{q}\t{}", s.label, a.surface.values[i][j]);
            }
        }
    }
    write_text(&dir.join(format!("{stem}_hurst.tsv")), &hurst)?;
    write_text(&dir.join(format!("{stem}_tau.tsv")), &tau)?;
    write_text(&dir.join(format!("{stem}_spectrum.tsv")), &spec)?;
    write_text(&dir.join(format!("{stem}_fluctuation.tsv")), &fluct)?;
    Ok(())
}

fn delta_alpha_tsv(rows: &[(String, &SeriesReport)]) -> String {
    let mut out = String::from("market\tseries\tdelta_alpha\talpha_min\talpha_max\tq_min\tq_max\tq_points\n");
    for (market, s) in rows {
        let sp = &s.analysis.spectrum;
        let _ = writeln!(
            out,
            "{market}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.label, sp.delta_alpha, sp.alpha_min, sp.alpha_max, sp.grid.q_min, sp.grid.q_max, sp.grid.q_points
        );
    }
    out
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| MfdfaError::Io(format!("{}: {e}", dir.display())))
}

/// Runs a manifest and writes its outputs into `out`.
pub fn execute(manifest: &RunManifest, out: &Path) -> Result<RunOutcome> {
    prepare_out(out)?;
    write_json(&out.join("manifest.json"), manifest)?;
    match manifest.command {
        CommandKind::Analyze => run_analyze(manifest, out),
        CommandKind::Split => run_split(manifest, out),
        CommandKind::ThresholdSweep => run_sweep(manifest, out),
        CommandKind::Synth => run_synth(manifest, out),
    }
}

fn run_analyze(m: &RunManifest, out: &Path) -> Result<RunOutcome> {
    let df = m.support_dimension;
    let results: Vec<std::result::Result<MarketAnalysis, Vec<Failure>>> = m
        .inputs
        .par_iter()
        .map(|input| {
            let market = input.label.clone();
            let (x, skipped, _) = load_returns(input).map_err(|e| vec![failure(market.clone(), &e)])?;
            check_variance(&x).map_err(|e| vec![failure(market.clone(), &e)])?;
            let cfg = m
                .config
                .restricted_to_len(x.len())
                .map_err(|e| vec![failure(market.clone(), &e)])?;
            let mut failures = Vec::new();
            let original = series_report("original", &x, &cfg, df)
                .map_err(|e| failures.push(failure(format!("{market}/original"), &e)))
                .ok();
            let surrogates: Vec<SeriesReport> = (0..m.surrogates)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(m.seed, i as u64);
                    let s = shuffle_surrogate(&x, seed);
                    series_report(&format!("surrogate_{i}"), &s, &cfg, df)
                        .map_err(|e| failure(format!("{market}/surrogate_{i}"), &e))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .filter_map(|r| r.map_err(|f| failures.push(f)).ok())
                .collect();
            if !failures.is_empty() {
                return Err(failures);
            }
            let widths: Vec<f64> = surrogates.iter().map(|s| s.delta_alpha).collect();
            Ok(MarketAnalysis {
                market,
                skipped_rows: skipped,
                config: cfg,
                original,
                surrogate_mean_delta_alpha: (!widths.is_empty()).then(|| mean(&widths)),
                surrogates,
            })
        })
        .collect();

    let mut markets = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(ma) => markets.push(ma),
            Err(f) => failures.extend(f),
        }
    }
    let mut summary = Vec::new();
    for ma in &markets {
        let series: Vec<&SeriesReport> = ma.original.iter().chain(&ma.surrogates).collect();
        write_series_tsvs(out, &ma.market, &series)?;
        summary.extend(series.into_iter().map(|s| (ma.market.clone(), s)));
    }
    write_text(&out.join("delta_alpha.tsv"), &delta_alpha_tsv(&summary))?;
    let report = AnalyzeReport {
        manifest: m.clone(),
        markets,
        failures: failures.clone(),
    };
    let json_path = out.join("analyze.json");
    write_json(&json_path, &report)?;
    Ok(RunOutcome {
        json_path,
        exit_code: exit_code_of(&failures),
        failures,
    })
}

fn period_report(
    x: &ReturnSeries,
    name: &str,
    cfg: &MfdfaConfig,
    m: &RunManifest,
) -> Result<PeriodReport> {
    check_variance(x)?;
    let original = series_report(name, x, cfg, m.support_dimension)?;
    let surrogates = (0..m.surrogates)
        .into_par_iter()
        .map(|i| {
            let s = shuffle_surrogate(x, derive_seed(m.seed, i as u64));
            series_report(&format!("{name}_surrogate_{i}"), &s, cfg, m.support_dimension)
        })
        .collect::<Result<Vec<_>>>()?;
    let widths: Vec<f64> = surrogates.iter().map(|s| s.delta_alpha).collect();
    Ok(PeriodReport {
        original,
        surrogate_mean_delta_alpha: mean(&widths),
        surrogates,
    })
}

fn split_market(input: &InputRef, m: &RunManifest) -> Result<MarketSplit> {
    let split = m
        .periods
        .ok_or_else(|| MfdfaError::Config("split manifest lacks period boundaries".into()))?;
    let ing = read_price_csv_path(&input.path)?;
    let (pa, pb) = split_prices(&ing.prices, &split)?;
    let a = log_returns(&pa)?;
    let b = log_returns(&pb)?;
    let whole = a.concat(&b)?;
    let cfg = m.config.restricted_to_len(a.len().min(b.len()))?;
    let units = [("whole", &whole), ("period_a", &a), ("period_b", &b)];
    let reports: Vec<Result<PeriodReport>> = units
        .par_iter()
        .map(|(name, x)| {
            period_report(x, name, &cfg, m)
                .map_err(|e| wrap_unit(&format!("{}/{name}", input.label), e))
        })
        .collect();
    let mut it = reports.into_iter();
    let whole_r = it.next().expect("three units")?;
    let a_r = it.next().expect("three units")?;
    let b_r = it.next().expect("three units")?;
    let row = ComparisonRow::from_widths(
        &input.label,
        b_r.original.delta_alpha,
        a_r.original.delta_alpha,
        whole_r.original.delta_alpha,
        whole_r.surrogate_mean_delta_alpha,
    );
    Ok(MarketSplit {
        market: input.label.clone(),
        skipped_rows: ing.skipped_rows,
        config: cfg,
        length_a: a.len(),
        length_b: b.len(),
        whole: whole_r,
        period_a: a_r,
        period_b: b_r,
        row,
    })
}

fn wrap_unit(unit: &str, e: MfdfaError) -> MfdfaError {
    match e {
        MfdfaError::InvalidInput(msg) => MfdfaError::InvalidInput(format!("{unit}: {msg}")),
        MfdfaError::Config(msg) => MfdfaError::Config(format!("{unit}: {msg}")),
        MfdfaError::Numerical(msg) => MfdfaError::Numerical(format!("{unit}: {msg}")),
        other => other,
    }
}

fn run_split(m: &RunManifest, out: &Path) -> Result<RunOutcome> {
    let results: Vec<(String, Result<MarketSplit>)> = m
        .inputs
        .par_iter()
        .map(|input| (input.label.clone(), split_market(input, m)))
        .collect();
    let mut markets = Vec::new();
    let mut failures = Vec::new();
    for (label, r) in results {
        match r {
            Ok(ms) => markets.push(ms),
            Err(e) => failures.push(failure(label, &e)),
        }
    }
    markets.sort_by(|a, b| a.market.cmp(&b.market));
    let comparison = ComparisonTable {
        rows: markets.iter().map(|ms| ms.row.clone()).collect(),
    };

    let mut summary = Vec::new();
    for ms in &markets {
        let series: Vec<&SeriesReport> = [&ms.whole, &ms.period_a, &ms.period_b]
            .into_iter()
            .flat_map(|p| std::iter::once(&p.original).chain(&p.surrogates))
            .collect();
        write_series_tsvs(out, &ms.market, &series)?;
        summary.extend(series.into_iter().map(|s| (ms.market.clone(), s)));
    }
    write_text(&out.join("delta_alpha.tsv"), &delta_alpha_tsv(&summary))?;
    let mut tsv = String::from(
        "market\tdelta_alpha_a\tdelta_alpha_b\tdelta_alpha_o\tdelta_alpha_s\tda_a_minus_da_b\tda_o_minus_da_s\tda_a_minus_da_s\tda_b_minus_da_s\n",
    );
    for r in &comparison.rows {
        let d = r.differences();
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.market,
            r.delta_alpha_after,
            r.delta_alpha_before,
            r.delta_alpha_original,
            r.delta_alpha_surrogate,
            d[0],
            d[1],
            d[2],
            d[3]
        );
    }
    write_text(&out.join("comparison.tsv"), &tsv)?;
    write_text(&out.join("comparison.txt"), &comparison.to_text())?;

    let report = SplitReport {
        manifest: m.clone(),
        markets,
        comparison,
        failures: failures.clone(),
    };
    let json_path = out.join("split.json");
    write_json(&json_path, &report)?;
    Ok(RunOutcome {
        json_path,
        exit_code: exit_code_of(&failures),
        failures,
    })
}

fn sweep_market(input: &InputRef, m: &RunManifest) -> Result<MarketSweep> {
    let ks = m
        .thresholds
        .as_ref()
        .ok_or_else(|| MfdfaError::Config("sweep manifest lacks thresholds".into()))?;
    let (x, skipped, _) = load_returns(input)?;
    check_variance(&x)?;
    let cfg = m.config.restricted_to_len(x.len())?;
    let df = m.support_dimension;
    let surrogates: Vec<ReturnSeries> = (0..m.surrogates)
        .map(|i| shuffle_surrogate(&x, derive_seed(m.seed, i as u64)))
        .collect();
    let unfiltered = analyze(&x, &cfg, df)?.delta_alpha();
    let rows = ks
        .par_iter()
        .map(|&k| {
            let unit = |e| wrap_unit(&format!("{}/k={k}", input.label), e);
            let filtered = threshold_filter(&x, k).map_err(unit)?;
            let original = analyze(&filtered, &cfg, df).map_err(unit)?.delta_alpha();
            let replicates = surrogates
                .iter()
                .map(|s| {
                    let fs = threshold_filter(s, k)?;
                    Ok(analyze(&fs, &cfg, df)?.delta_alpha())
                })
                .collect::<Result<Vec<f64>>>()
                .map_err(unit)?;
            Ok(SweepRow {
                k_sigma: k,
                eliminated: threshold_exceedances(x.values(), k).len(),
                delta_alpha_original: original,
                delta_alpha_surrogate: mean(&replicates),
                surrogate_replicates: replicates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarketSweep {
        market: input.label.clone(),
        skipped_rows: skipped,
        config: cfg,
        unfiltered_delta_alpha: unfiltered,
        rows,
    })
}

fn run_sweep(m: &RunManifest, out: &Path) -> Result<RunOutcome> {
    let results: Vec<(String, Result<MarketSweep>)> = m
        .inputs
        .par_iter()
        .map(|input| (input.label.clone(), sweep_market(input, m)))
        .collect();
    let mut markets = Vec::new();
    let mut failures = Vec::new();
    for (label, r) in results {
        match r {
            Ok(ms) => markets.push(ms),
            Err(e) => failures.push(failure(label, &e)),
        }
    }
    for ms in &markets {
        let mut tsv = String::from("k_sigma\teliminated\tdelta_alpha_original\tdelta_alpha_surrogate\n");
        for r in &ms.rows {
            let _ = writeln!(
                tsv,
                "{}\t{}\t{}\t{}",
                r.k_sigma, r.eliminated, r.delta_alpha_original, r.delta_alpha_surrogate
            );
        }
        write_text(&out.join(format!("{}_threshold.tsv", file_label(&ms.market))), &tsv)?;
    }
    let report = SweepReport {
        manifest: m.clone(),
        markets,
        failures: failures.clone(),
    };
    let json_path = out.join("threshold_sweep.json");
    write_json(&json_path, &report)?;
    Ok(RunOutcome {
        json_path,
        exit_code: exit_code_of(&failures),
        failures,
    })
}

/// Generator output for a synth manifest, integrated into prices.
pub fn synth_prices(m: &RunManifest) -> Result<crate::series::PriceSeries> {
    let s = m
        .synth
        .as_ref()
        .ok_or_else(|| MfdfaError::Config("synth manifest lacks generator settings".into()))?;
    if !(s.volatility.is_finite() && s.volatility > 0.0) {
        return Err(MfdfaError::Config(format!(
            "volatility must be positive, got {}",
            s.volatility
        )));
    }
    if !(s.initial.is_finite() && s.initial > 0.0) {
        return Err(MfdfaError::Config(format!(
            "initial price must be positive, got {}",
            s.initial
        )));
    }
    let x = match s.kind {
        SynthKind::Cascade => binomial_cascade(&CascadeSpec {
            levels: s.levels,
            a: s.a,
            seed: m.seed,
        })?,
        SynthKind::Gaussian => gaussian_iid(s.n, m.seed)?,
        SynthKind::StudentT => student_t_iid(s.n, s.dof, m.seed)?,
    };
    let sd = sample_std(x.values());
    prices_from_returns(&x, s.start, s.initial, s.volatility / sd)
}

fn run_synth(m: &RunManifest, out: &Path) -> Result<RunOutcome> {
    let s = m
        .synth
        .as_ref()
        .ok_or_else(|| MfdfaError::Config("synth manifest lacks generator settings".into()))?;
    let prices = synth_prices(m)?;
    let csv_path = out.join(format!("{}.csv", file_label(&s.name)));
    let file = fs::File::create(&csv_path)
        .map_err(|e| MfdfaError::Io(format!("{}: {e}", csv_path.display())))?;
    write_price_csv(std::io::BufWriter::new(file), &prices)?;
    Ok(RunOutcome {
        json_path: out.join("manifest.json"),
        exit_code: 0,
        failures: Vec::new(),
    })
}

fn synth_manifest(args: &SynthArgs) -> RunManifest {
    let name = args.name.clone().unwrap_or_else(|| {
        match args.kind {
            SynthKind::Cascade => "cascade",
            SynthKind::Gaussian => "gaussian",
            SynthKind::StudentT => "student_t",
        }
        .to_string()
    });
    RunManifest {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        command: CommandKind::Synth,
        inputs: Vec::new(),
        config: MfdfaConfig::default(),
        support_dimension: crate::spectrum::DEFAULT_SUPPORT_DIMENSION,
        seed: args.seed,
        surrogates: 0,
        periods: None,
        thresholds: None,
        synth: Some(SynthSettings {
            kind: args.kind,
            levels: args.levels,
            a: args.a,
            n: args.n,
            dof: args.dof,
            volatility: args.volatility,
            start: args.start,
            initial: args.initial,
            name,
        }),
        defaults_used: Vec::new(),
        timestamp: args.timestamp.clone().unwrap_or_else(now_timestamp),
    }
}

/// Reads a manifest previously written by [`execute`].
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| MfdfaError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| MfdfaError::Config(format!("{}: {e}", path.display())))
}

/// Builds the manifest and output directory for a parsed command line.
pub fn plan(cli: &Cli) -> Result<(RunManifest, PathBuf)> {
    match &cli.command {
        Command::Analyze(a) => Ok((manifest_for(a, CommandKind::Analyze)?, a.out.clone())),
        Command::Split(s) => {
            let mut m = manifest_for(&s.common, CommandKind::Split)?;
            m.periods = Some(match (s.pre_end, s.post_start) {
                (Some(pre), Some(post)) => PeriodSplit::new(pre, post)?,
                _ => {
                    m.defaults_used.push(format!("periods=excise {}", s.excise_year));
                    PeriodSplit::excising_year(s.excise_year)?
                }
            });
            Ok((m, s.common.out.clone()))
        }
        Command::ThresholdSweep(t) => {
            let mut m = manifest_for(&t.common, CommandKind::ThresholdSweep)?;
            if t.k.is_empty() {
                return Err(MfdfaError::Config("empty threshold list".into()));
            }
            if let Some(k) = t.k.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
                return Err(MfdfaError::Config(format!("threshold {k} must be positive")));
            }
            if t.k.windows(2).any(|w| w[1] <= w[0]) {
                return Err(MfdfaError::Config("thresholds must be strictly increasing".into()));
            }
            m.thresholds = Some(t.k.clone());
            Ok((m, t.common.out.clone()))
        }
        Command::Synth(s) => Ok((synth_manifest(s), s.out.clone())),
        Command::Rerun(r) => Ok((load_manifest(&r.manifest)?, r.out.clone())),
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = plan(cli).and_then(|(manifest, out)| execute(&manifest, &out));
    match outcome {
        Ok(o) => {
            for f in &o.failures {
                eprintln!("mfdfa: failed {}: {}", f.unit, f.error);
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("mfdfa: {e}");
            e.exit_code()
        }
    }
}
