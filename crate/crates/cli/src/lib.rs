//! The `locfit` command line: measure, synthesize, fit, compare, render.
//!
//! Exit status: 0 success, 1 usage or validation error, 2 every fit cell
//! failed, 3 I/O or measurement failure.

pub mod report;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

use locfit::bench::{aggregate_timings, BootstrapSettings};
use locfit::distributions::{builtin, FamilyRef, SampleScale, BUILTIN_NAMES};
use locfit::ingest::{measure_command, read_sample, synth_sample, write_sample, MeasureOptions, Sample};
use locfit::location::EstimatorConfig;
use locfit::mle::{fit, FitOutcome, GridSpec, Method, OptimizerSettings};
use locfit::selection::{best_family_per_method, cross_validate, quality_deltas, win_counts, Metric, Row};

use report::{Cell, CompareReport, FitDocument, RunSettings, SetInfo, WinCount, SCHEMA};

/// Environment variable capping the number of concurrently fitted cells.
pub const THREADS_ENV: &str = "LOCFIT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] locfit::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("all {0} fit cells failed")]
    AllFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::AllFailed(_) => 2,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
            CliError::Core(e) => match e {
                locfit::Error::Io(_) | locfit::Error::Parse { .. } | locfit::Error::Measurement { .. } => 3,
                _ => 1,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "locfit", version, about = "Fit lifetime distributions to samples with an unknown minimum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time a shell command repeatedly and write the sample file.
    Measure(MeasureArgs),
    /// Draw a synthetic sample from a family shifted by a location.
    Synth(SynthArgs),
    /// Fit one sample with several families and methods.
    Fit(FitArgs),
    /// Fit many samples and build comparison tables.
    Compare(CompareArgs),
    /// Regenerate the CSV tables from a comparison report.
    Render(RenderArgs),
    /// Summaries of a sample's first and second halves.
    Halves(HalvesArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Shell command to time.
    #[arg(long = "cmd")]
    pub command: String,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub warmup: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Export LOCFIT_SEED=<value> to every run.
    #[arg(long)]
    pub seed_env: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub family: String,
    /// Comma-separated parameter values.
    #[arg(long, allow_hyphen_values = true)]
    pub params: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// Comma-separated family names.
    #[arg(long, default_value = "gamma,weibull,lnormal")]
    pub families: String,
    /// Comma-separated method names, or `all`.
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// `adaptive` (centred on the data) or `unit` (fixed).
    #[arg(long, default_value = "adaptive")]
    pub grid: String,
    #[arg(long, default_value_t = 10.0)]
    pub k_base: f64,
    #[arg(long, default_value_t = 0.05)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q_min: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Cross-validate with this many folds.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Sample files, one per sample set.
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Keep every family in deltas and count wins among families per method.
    #[arg(long)]
    pub per_family: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct HalvesArgs {
    #[arg(long)]
    pub input: PathBuf,
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("locfit: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Measure(a) => cmd_measure(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Compare(a) => cmd_compare(&a).map(|_| ()),
        Command::Render(a) => {
            let report = report::read_compare_report(&a.report)?;
            report::write_csv_tables(&report, &a.out_dir)
        }
        Command::Halves(a) => {
            let sample = read_sample(&a.input)?;
            let halves = locfit::ingest::split_halves_check(&sample.values)?;
            println!("{}", serde_json::to_string_pretty(&halves)?);
            Ok(())
        }
    }
}

fn cmd_measure(a: &MeasureArgs) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let sample = measure_command(&a.command, a.runs, a.warmup, &MeasureOptions { seed_env: a.seed_env })?;
    write_sample(&sample, &a.out)?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let family = parse_families(&a.family)?.remove(0);
    let params = a
        .params
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("bad parameter {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if params.len() != family.param_count() {
        let names: Vec<&str> = family.param_specs().iter().map(|s| s.name.as_str()).collect();
        return Err(CliError::Usage(format!(
            "{} takes {} parameters ({}), got {}",
            family.name(),
            names.len(),
            names.join(", "),
            params.len()
        )));
    }
    let sample = synth_sample(family.as_ref(), &params, a.c, a.n, a.seed)?;
    write_sample(&sample, &a.out)?;
    Ok(())
}

pub fn parse_families(list: &str) -> Result<Vec<FamilyRef>, CliError> {
    let fams = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            builtin(name).ok_or_else(|| {
                CliError::Usage(format!("unknown family {name:?}; valid families: {}", BUILTIN_NAMES.join(", ")))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if fams.is_empty() {
        return Err(CliError::Usage("no families selected".into()));
    }
    Ok(fams)
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    if list.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|m| m.parse::<Method>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods selected".into()));
    }
    Ok(methods)
}

struct Model {
    families: Vec<FamilyRef>,
    settings: RunSettings,
    grid: GridSpec,
}

fn prepare(m: &ModelArgs) -> Result<Model, CliError> {
    let families = parse_families(&m.families)?;
    let methods = parse_methods(&m.methods)?;
    let grid = match m.grid.as_str() {
        "adaptive" => GridSpec::Adaptive,
        "unit" => GridSpec::Fixed(SampleScale::unit()),
        other => return Err(CliError::Usage(format!("unknown grid {other:?}; expected adaptive or unit"))),
    };
    let estimator = EstimatorConfig { k_base: m.k_base, nu: m.nu, q_min: m.q_min };
    estimator.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let optimizer = OptimizerSettings { max_iterations: m.max_iter, ..Default::default() };
    optimizer.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(folds) = m.folds {
        if folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
    }
    let settings = RunSettings {
        families: families.iter().map(|f| f.name().to_string()).collect(),
        methods,
        grid: m.grid.clone(),
        estimator,
        optimizer,
        folds: m.folds,
        seed: m.seed,
    };
    Ok(Model { families, settings, grid })
}

fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

struct CellJob<'a> {
    set: usize,
    family: &'a FamilyRef,
    method: Method,
}

/// Fits one cell; the per-start outcomes come back for timing.
fn run_cell(model: &Model, set: &Sample, label: &str, family: &FamilyRef, method: Method) -> (Cell, Vec<FitOutcome>) {
    let s = &model.settings;
    let mut cell = Cell {
        set: label.to_string(),
        family: family.name().to_string(),
        method,
        outcome: None,
        metrics: None,
        selection: None,
        n_starts: 0,
        n_converged: 0,
        warnings: Vec::new(),
        error: None,
    };
    let report = match fit(family.as_ref(), method, &set.values, &s.estimator, &model.grid, &s.optimizer) {
        Ok(r) => r,
        Err(e) => {
            if let locfit::Error::FitFailed { warnings, .. } = &e {
                cell.warnings = warnings.clone();
            }
            cell.error = Some(e.to_string());
            return (cell, Vec::new());
        }
    };
    cell.n_starts = report.starts.len();
    cell.n_converged = report.starts.iter().filter(|o| o.converged).count();
    cell.selection = Some(report.selection);
    cell.warnings = report.warnings.clone();
    let metrics = locfit::selection::metrics(&report.best, set.values.len());
    match metrics {
        Ok(mut m) => {
            if let Some(folds) = s.folds {
                match cross_validate(
                    family,
                    method,
                    &set.values,
                    folds,
                    s.seed,
                    &s.estimator,
                    &model.grid,
                    &s.optimizer,
                ) {
                    Ok(cv) => m.cv_neg2l = Some(cv.mean_neg2l),
                    Err(e) => cell.warnings.push(format!("cross-validation: {e}")),
                }
            }
            cell.metrics = Some(m);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell.outcome = Some(report.best);
    (cell, report.starts)
}

fn load_sets(paths: &[PathBuf]) -> Result<(Vec<Sample>, Vec<SetInfo>), CliError> {
    let mut samples = Vec::new();
    let mut infos: Vec<SetInfo> = Vec::new();
    for path in paths {
        let sample = read_sample(path)?;
        if sample.values.is_empty() {
            return Err(CliError::Usage(format!("{} holds no values", path.display())));
        }
        let mut label = sample.label.clone();
        if infos.iter().any(|i| i.label == label) {
            label = format!("{label}#{}", infos.len());
        }
        infos.push(SetInfo { label, path: path.display().to_string(), n: sample.values.len() });
        samples.push(sample);
    }
    Ok((samples, infos))
}

fn run_grid(model: &Model, samples: &[Sample], infos: &[SetInfo]) -> Result<(Vec<Cell>, Vec<Vec<FitOutcome>>), CliError> {
    let mut jobs = Vec::new();
    for set in 0..samples.len() {
        for family in &model.families {
            for method in &model.settings.methods {
                jobs.push(CellJob { set, family, method: *method });
            }
        }
    }
    let results: Vec<(Cell, Vec<FitOutcome>)> = pool()?.install(|| {
        jobs.par_iter()
            .map(|j| run_cell(model, &samples[j.set], &infos[j.set].label, j.family, j.method))
            .collect()
    });
    Ok(results.into_iter().unzip())
}

fn write_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    let model = prepare(&a.model)?;
    let (samples, infos) = load_sets(std::slice::from_ref(&a.input))?;
    let (cells, _) = run_grid(&model, &samples, &infos)?;
    let failed = cells.iter().filter(|c| !c.ok()).count();
    let doc = FitDocument { schema: SCHEMA, input: infos[0].clone(), settings: model.settings, cells };
    write_json(&doc, a.out.as_deref())?;
    if failed == doc.cells.len() {
        return Err(CliError::AllFailed(failed));
    }
    Ok(())
}

fn rows_of(cells: &[Cell]) -> Vec<Row> {
    cells
        .iter()
        .filter(|c| c.ok())
        .map(|c| Row {
            set: c.set.clone(),
            family: c.family.clone(),
            method: c.method,
            metrics: c.metrics.expect("ok cell has metrics"),
        })
        .collect()
}

/// Deltas and win counts for every metric.
pub fn comparison_tables(
    cells: &[Cell],
    methods: &[Method],
    metrics: &[Metric],
    per_family: bool,
) -> Result<(BTreeMap<String, Vec<locfit::selection::Delta>>, Vec<WinCount>), CliError> {
    let rows = rows_of(cells);
    let mut deltas = BTreeMap::new();
    let mut wins = Vec::new();
    for &metric in metrics {
        if per_family {
            deltas.insert(metric.to_string(), quality_deltas(&rows, metric));
            for &method in methods {
                let subset: Vec<Row> = rows.iter().filter(|r| r.method == method).cloned().collect();
                for place in [1, 2] {
                    for ((family, m), count) in win_counts(&subset, metric, place)? {
                        wins.push(WinCount {
                            metric: metric.to_string(),
                            place,
                            within_method: Some(method),
                            family,
                            method: m,
                            count,
                        });
                    }
                }
            }
        } else {
            let best = best_family_per_method(&rows, metric);
            deltas.insert(metric.to_string(), quality_deltas(&best, metric));
            // a method counts once however its best family changes across sets
            let by_method: Vec<Row> = best.into_iter().map(|r| Row { family: "*".into(), ..r }).collect();
            for place in [1, 2] {
                for ((family, m), count) in win_counts(&by_method, metric, place)? {
                    wins.push(WinCount { metric: metric.to_string(), place, within_method: None, family, method: m, count });
                }
            }
        }
    }
    Ok((deltas, wins))
}

pub fn cmd_compare(a: &CompareArgs) -> Result<CompareReport, CliError> {
    let model = prepare(&a.model)?;
    let (samples, infos) = load_sets(&a.inputs)?;
    let (cells, starts) = run_grid(&model, &samples, &infos)?;
    if cells.iter().all(|c| !c.ok()) {
        return Err(CliError::AllFailed(cells.len()));
    }

    let mut metrics = vec![Metric::Neg2l, Metric::Aic, Metric::Caic, Metric::Hqic, Metric::Bic];
    if model.settings.folds.is_some() {
        metrics.push(Metric::CvNeg2l);
    }
    let (deltas, wins) = comparison_tables(&cells, &model.settings.methods, &metrics, a.per_family)?;

    // timings pool every start of a (family, method) across sample sets
    let mut pooled: BTreeMap<(usize, usize), Vec<FitOutcome>> = BTreeMap::new();
    for (cell, outcomes) in cells.iter().zip(starts) {
        let fi = model.settings.families.iter().position(|f| *f == cell.family).expect("known family");
        let mi = model.settings.methods.iter().position(|m| *m == cell.method).expect("known method");
        pooled.entry((fi, mi)).or_default().extend(outcomes);
    }
    let boot = BootstrapSettings { seed: model.settings.seed, ..Default::default() };
    let timings = pooled
        .values()
        .filter(|v| !v.is_empty())
        .map(|v| aggregate_timings(v, &boot))
        .collect::<Result<Vec<_>, _>>()?;

    let report = CompareReport {
        schema: SCHEMA,
        sets: infos,
        settings: model.settings,
        marginalized: !a.per_family,
        metrics: metrics.iter().map(|m| m.to_string()).collect(),
        cells,
        deltas,
        wins,
        timings,
    };
    std::fs::create_dir_all(&a.out_dir)?;
    write_json(&report, Some(&a.out_dir.join("report.json")))?;
    report::write_csv_tables(&report, &a.out_dir)?;
    Ok(report)
}
