//! JSON report documents and the CSV tables derived from them.
//!
//! CSV output is a pure function of a [`CompareReport`], so a report read
//! back from JSON regenerates byte-identical tables.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use locfit::bench::TimingAggregate;
use locfit::location::EstimatorConfig;
use locfit::mle::{FitOutcome, Method, OptimizerSettings, Selection};
use locfit::selection::{Delta, MetricSet};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub families: Vec<String>,
    pub methods: Vec<Method>,
    pub grid: String,
    pub estimator: EstimatorConfig,
    pub optimizer: OptimizerSettings,
    pub folds: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetInfo {
    pub label: String,
    pub path: String,
    pub n: usize,
}

/// One (sample set, family, method) fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub set: String,
    pub family: String,
    pub method: Method,
    pub outcome: Option<FitOutcome>,
    pub metrics: Option<MetricSet>,
    pub selection: Option<Selection>,
    pub n_starts: usize,
    pub n_converged: usize,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl Cell {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.metrics.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema: u32,
    pub input: SetInfo,
    pub settings: RunSettings,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinCount {
    pub metric: String,
    pub place: usize,
    /// The method whose families were ranked, when counting per family.
    pub within_method: Option<Method>,
    pub family: String,
    pub method: Method,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema: u32,
    pub sets: Vec<SetInfo>,
    pub settings: RunSettings,
    /// Whether deltas and wins use each method's best family.
    pub marginalized: bool,
    pub metrics: Vec<String>,
    pub cells: Vec<Cell>,
    pub deltas: BTreeMap<String, Vec<Delta>>,
    pub wins: Vec<WinCount>,
    pub timings: Vec<TimingAggregate>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_u(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn metrics_csv(cells: &[Cell]) -> Result<String, CliError> {
    let header = [
        "set", "family", "method", "status", "k", "n", "neg2l", "aic", "caic", "hqic", "bic", "cv_neg2l", "c_hat",
        "converged", "selection", "params",
    ];
    let rows = cells
        .iter()
        .map(|c| {
            let m = c.metrics.as_ref();
            let o = c.outcome.as_ref();
            vec![
                c.set.clone(),
                c.family.clone(),
                c.method.to_string(),
                if c.ok() { "ok".into() } else { "failed".into() },
                m.map(|m| m.k.to_string()).unwrap_or_default(),
                m.map(|m| m.n.to_string()).unwrap_or_default(),
                opt(m.map(|m| m.neg2l)),
                opt(m.map(|m| m.aic)),
                opt(m.map(|m| m.caic)),
                opt(m.map(|m| m.hqic)),
                opt(m.map(|m| m.bic)),
                opt(m.and_then(|m| m.cv_neg2l)),
                opt(o.and_then(|o| o.c_hat)),
                o.map(|o| o.converged.to_string()).unwrap_or_default(),
                match c.selection {
                    Some(Selection::Converged) => "converged".into(),
                    Some(Selection::AllStarts) => "all_starts".into(),
                    None => String::new(),
                },
                o.map(|o| o.params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")).unwrap_or_default(),
            ]
        })
        .collect();
    table(&header, rows)
}

pub fn deltas_csv(report: &CompareReport) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for metric in &report.metrics {
        for d in report.deltas.get(metric).into_iter().flatten() {
            rows.push(vec![
                metric.clone(),
                d.set.clone(),
                d.family.clone(),
                d.method.to_string(),
                d.value.to_string(),
                d.delta.to_string(),
            ]);
        }
    }
    table(&["metric", "set", "family", "method", "value", "delta"], rows)
}

/// One row per (metric, set) and one delta column per method: the shape a
/// box-plot of deltas per method wants.
pub fn deltas_wide_csv(report: &CompareReport) -> Result<String, CliError> {
    let methods = &report.settings.methods;
    let mut header = vec!["metric".to_string(), "set".to_string()];
    if !report.marginalized {
        header.push("family".into());
    }
    header.extend(methods.iter().map(|m| m.to_string()));
    let mut rows = Vec::new();
    for metric in &report.metrics {
        let mut by_key: BTreeMap<(String, String), BTreeMap<Method, f64>> = BTreeMap::new();
        for d in report.deltas.get(metric).into_iter().flatten() {
            let family = if report.marginalized { String::new() } else { d.family.clone() };
            by_key.entry((d.set.clone(), family)).or_default().insert(d.method, d.delta);
        }
        for ((set, family), cols) in by_key {
            let mut row = vec![metric.clone(), set];
            if !report.marginalized {
                row.push(family);
            }
            row.extend(methods.iter().map(|m| opt(cols.get(m).copied())));
            rows.push(row);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    table(&header, rows)
}

pub fn wins_csv(report: &CompareReport) -> Result<String, CliError> {
    let rows = report
        .wins
        .iter()
        .map(|w| {
            vec![
                w.metric.clone(),
                w.place.to_string(),
                w.within_method.map(|m| m.to_string()).unwrap_or_default(),
                w.family.clone(),
                w.method.to_string(),
                w.count.to_string(),
            ]
        })
        .collect();
    table(&["metric", "place", "within_method", "family", "method", "count"], rows)
}

pub const TIMING_COLUMNS: [&str; 10] = [
    "family",
    "method",
    "n_starts",
    "n_converged",
    "mean_all_ns",
    "mean_conv_ns",
    "ci_all_lo_ns",
    "ci_all_hi_ns",
    "ci_conv_lo_ns",
    "ci_conv_hi_ns",
];

pub fn timings_csv(timings: &[TimingAggregate]) -> Result<String, CliError> {
    let rows = timings
        .iter()
        .map(|t| {
            vec![
                t.family.clone(),
                t.method.to_string(),
                t.n_starts.to_string(),
                t.n_converged.to_string(),
                t.mean_all_ns.to_string(),
                opt_u(t.mean_converged_ns),
                t.ci_all_ns.0.to_string(),
                t.ci_all_ns.1.to_string(),
                opt_u(t.ci_converged_ns.map(|c| c.0)),
                opt_u(t.ci_converged_ns.map(|c| c.1)),
            ]
        })
        .collect();
    table(&TIMING_COLUMNS, rows)
}

/// File name and contents of every CSV table of a comparison.
pub fn csv_tables(report: &CompareReport) -> Result<Vec<(&'static str, String)>, CliError> {
    Ok(vec![
        ("metrics.csv", metrics_csv(&report.cells)?),
        ("deltas.csv", deltas_csv(report)?),
        ("deltas_wide.csv", deltas_wide_csv(report)?),
        ("wins.csv", wins_csv(report)?),
        ("timings.csv", timings_csv(&report.timings)?),
    ])
}

pub fn write_csv_tables(report: &CompareReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in csv_tables(report)? {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

pub fn read_compare_report(path: &Path) -> Result<CompareReport, CliError> {
    let text = std::fs::read_to_string(path)?;
    let report: CompareReport =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a comparison report: {e}", path.display())))?;
    if report.schema != SCHEMA {
        return Err(CliError::Usage(format!("unsupported report schema {}", report.schema)));
    }
    Ok(report)
}
