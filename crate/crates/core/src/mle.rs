//! Maximum-likelihood fits over grids of starting points, with the location
//! handled by one of seven methods.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::distributions::{Family, FamilyRef, ParamVector, SampleScale};
use crate::error::{domain, Error, Result};
use crate::location::{estimate_c2, min_level, shift_sample, Estimator, EstimatorConfig};
pub use crate::optimize::OptimizerSettings;
use crate::optimize::{maximize, Transform};

/// How the location is handled around the likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// No location: the family is fitted to the raw sample.
    Standard,
    /// The location is a free parameter optimized jointly with θ.
    InferC,
    /// The location is estimated up front and subtracted.
    Estimated(Estimator),
    /// The location tracks θ: the sample minimum sits at a quantile of the
    /// minimum's law.
    IteratedC,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Standard,
        Method::InferC,
        Method::Estimated(Estimator::C1),
        Method::Estimated(Estimator::C2),
        Method::Estimated(Estimator::C3),
        Method::Estimated(Estimator::C4),
        Method::IteratedC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::InferC => "inferC",
            Method::Estimated(e) => e.as_str(),
            Method::IteratedC => "iteratedC",
        }
    }

    /// Parameters charged beyond the family's own.
    pub fn extra_params(self) -> usize {
        match self {
            Method::InferC => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.as_str()).collect();
            domain(format!("unknown method {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of one optimization (a single start) or of a whole fit (the
/// selected start).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub family: String,
    pub method: Method,
    pub params: ParamVector,
    pub c_hat: Option<f64>,
    pub loglik: f64,
    pub neg2l: f64,
    pub converged: bool,
    pub n_evaluations: usize,
    pub elapsed_ns: u64,
    /// Starting point in natural coordinates; `inferC` appends its starting
    /// location.
    pub init_point: ParamVector,
}

impl FitOutcome {
    /// Parameters charged to information criteria.
    pub fn k(&self) -> usize {
        self.params.len() + self.method.extra_params()
    }

    pub fn shift(&self) -> f64 {
        self.c_hat.unwrap_or(0.0)
    }
}

/// Which pool of starts the reported outcome was chosen from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Best over starts that converged.
    Converged,
    /// No start converged; best over all starts with a finite likelihood.
    AllStarts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub best: FitOutcome,
    pub starts: Vec<FitOutcome>,
    pub selection: Selection,
    pub warnings: Vec<String>,
}

/// Where starting points come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// The family's default grid centred on the data being fitted.
    Adaptive,
    /// The family's default grid centred on fixed summaries.
    Fixed(SampleScale),
    /// Explicit starting points.
    Points(Vec<ParamVector>),
}

impl GridSpec {
    pub fn points(&self, family: &dyn Family, data: &[f64]) -> Vec<ParamVector> {
        match self {
            GridSpec::Adaptive => family.default_grid(&SampleScale::of(data)),
            GridSpec::Fixed(scale) => family.default_grid(scale),
            GridSpec::Points(p) => p.clone(),
        }
    }
}

/// Σ log f(xᵢ | θ), or the penalty when any point has zero density.
///
/// ```
/// use locfit::distributions::builtin;
/// use locfit::mle::log_likelihood;
/// let gamma = builtin("gamma").unwrap();
/// let ll = log_likelihood(gamma.as_ref(), &[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
/// assert!((ll - (-3.0 * 2f64.ln() - 3.0)).abs() < 1e-12);
/// ```
pub fn log_likelihood(family: &dyn Family, params: &[f64], sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Contract("log-likelihood of an empty sample".into()));
    }
    family.check(params)?;
    Ok(shifted_loglik(family, params, sample, 0.0, OptimizerSettings::default().penalty_value))
}

fn shifted_loglik(family: &dyn Family, params: &[f64], sample: &[f64], c: f64, penalty: f64) -> f64 {
    let mut total = 0.0;
    for x in sample {
        let v = family.ln_pdf_unchecked(params, x - c);
        if !v.is_finite() {
            // −∞ (outside support), NaN, or an unbounded density
            return penalty;
        }
        total += v;
    }
    if total.is_finite() {
        total
    } else {
        penalty
    }
}

fn in_domain(family: &dyn Family, params: &[f64]) -> bool {
    family.param_specs().iter().zip(params).all(|(s, v)| s.domain.contains(*v))
}

fn transforms(family: &dyn Family) -> Vec<Transform> {
    family.param_specs().iter().map(|s| Transform::for_domain(s.domain)).collect()
}

fn validate_sample(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Contract("cannot fit an empty sample".into()));
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(domain(format!("sample contains non-finite value {bad}")));
    }
    Ok(())
}

struct Start {
    init: Vec<f64>,
    optimum: crate::optimize::Optimum,
    elapsed_ns: u64,
}

fn run_start(
    init: Vec<f64>,
    transforms: &[Transform],
    settings: &OptimizerSettings,
    objective: impl FnMut(&[f64]) -> f64,
) -> Start {
    let t0 = Instant::now();
    let optimum = maximize(objective, &init, transforms, settings);
    let elapsed_ns = u64::try_from(t0.elapsed().as_nanos()).unwrap_or(u64::MAX);
    Start { init, optimum, elapsed_ns }
}

/// Folds per-start outcomes into a report: best over converged starts,
/// falling back to best over all starts; ties go to the earliest start.
fn select(
    family: &dyn Family,
    method: Method,
    starts: Vec<FitOutcome>,
    mut warnings: Vec<String>,
) -> Result<FitReport> {
    let pick = |only_converged: bool| {
        let mut best: Option<usize> = None;
        for (i, s) in starts.iter().enumerate() {
            if !s.loglik.is_finite() || (only_converged && !s.converged) {
                continue;
            }
            if best.is_none_or(|b| s.loglik > starts[b].loglik) {
                best = Some(i);
            }
        }
        best
    };
    let (index, selection) = match (pick(true), pick(false)) {
        (Some(i), _) => (i, Selection::Converged),
        (None, Some(i)) => {
            warnings.push("no start converged; reporting the best non-converged start".into());
            (i, Selection::AllStarts)
        }
        (None, None) => {
            return Err(Error::FitFailed {
                family: family.name().to_string(),
                method: method.to_string(),
                diagnostics: format!("none of {} starts reached a finite likelihood", starts.len()),
                warnings,
            })
        }
    };
    Ok(FitReport { best: starts[index].clone(), starts, selection, warnings })
}

fn outcome(family: &dyn Family, method: Method, start: Start, penalty: f64, c_hat: Option<f64>, n_theta: usize) -> FitOutcome {
    let Start { init, optimum, elapsed_ns } = start;
    let finite = optimum.value.is_finite() && optimum.value > penalty;
    let loglik = if finite { optimum.value } else { f64::NEG_INFINITY };
    FitOutcome {
        family: family.name().to_string(),
        method,
        params: ParamVector(optimum.x[..n_theta].to_vec()),
        c_hat,
        loglik,
        neg2l: -2.0 * loglik,
        converged: optimum.converged && finite,
        n_evaluations: optimum.evaluations,
        elapsed_ns,
        init_point: ParamVector(init),
    }
}

fn degenerate(family: &dyn Family, method: Method, sample: &[f64], warnings: Vec<String>) -> Option<Error> {
    let first = sample[0];
    (sample.len() > 1 && sample.iter().all(|x| *x == first)).then(|| Error::FitFailed {
        family: family.name().to_string(),
        method: method.to_string(),
        diagnostics: "zero-variance sample: the likelihood is unbounded".into(),
        warnings,
    })
}

/// Fits `family` to the raw sample from every grid point.
pub fn fit_standard(
    family: &dyn Family,
    sample: &[f64],
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<FitReport> {
    fit_on(family, Method::Standard, sample, None, grid, settings, Vec::new())
}

fn fit_on(
    family: &dyn Family,
    method: Method,
    data: &[f64],
    c_hat: Option<f64>,
    grid: &GridSpec,
    settings: &OptimizerSettings,
    warnings: Vec<String>,
) -> Result<FitReport> {
    validate_sample(data)?;
    settings.validate()?;
    if let Some(err) = degenerate(family, method, data, warnings.clone()) {
        return Err(err);
    }
    let tr = transforms(family);
    let penalty = settings.penalty_value;
    let n_theta = family.param_count();
    let starts = grid
        .points(family, data)
        .into_iter()
        .map(|init| {
            let start = run_start(init.0, &tr, settings, |p| {
                if !in_domain(family, p) {
                    return penalty;
                }
                shifted_loglik(family, p, data, 0.0, penalty)
            });
            outcome(family, method, start, penalty, c_hat, n_theta)
        })
        .collect();
    select(family, method, starts, warnings)
}

/// Distances `m̄ − c₀` for the starting locations of [`fit_infer_c`].
fn location_offsets(sample: &[f64]) -> Vec<f64> {
    let m = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = estimate_c2(sample).map(|e| m - e.c_hat).unwrap_or(0.0);
    let fallback = if m != 0.0 { 0.1 * m.abs() } else { 1.0 };
    let mut out: Vec<f64> = Vec::new();
    for d in [0.5 * m.abs(), 0.1 * m.abs(), spread] {
        // keep the starting location non-negative for positive data
        let d = if m > 0.0 { d.min(m) } else { d };
        let d = if d > 0.0 && d.is_finite() { d } else { fallback };
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// Optimizes `(θ, c)` jointly, with `c = m̄ − exp(u)` so that `c < m̄`.
pub fn fit_infer_c(
    family: &dyn Family,
    sample: &[f64],
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<FitReport> {
    let method = Method::InferC;
    validate_sample(sample)?;
    settings.validate()?;
    if let Some(err) = degenerate(family, method, sample, Vec::new()) {
        return Err(err);
    }
    let m = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let offsets = location_offsets(sample);
    let reference = shift_sample(sample, m - offsets[offsets.len() - 1]).values;
    let theta_grid = grid.points(family, &reference);

    let n_theta = family.param_count();
    let mut tr = transforms(family);
    tr.push(Transform::Identity);
    let penalty = settings.penalty_value;

    let mut starts = Vec::with_capacity(theta_grid.len() * offsets.len());
    for theta in &theta_grid {
        for d in &offsets {
            let mut init = theta.0.clone();
            init.push(d.ln());
            let start = run_start(init, &tr, settings, |p| {
                let (theta, u) = p.split_at(n_theta);
                if !in_domain(family, theta) {
                    return penalty;
                }
                let c = m - u[0].exp();
                if !(c < m) {
                    return penalty;
                }
                shifted_loglik(family, theta, sample, c, penalty)
            });
            let c_hat = m - start.optimum.x[n_theta].exp();
            let mut out = outcome(family, method, start, penalty, Some(c_hat), n_theta);
            let u0 = out.init_point.0[n_theta];
            out.init_point.0[n_theta] = m - u0.exp();
            starts.push(out);
        }
    }
    select(family, method, starts, Vec::new())
}

/// Subtracts the estimated location, then fits the family as usual.
pub fn fit_with_estimator(
    family: &dyn Family,
    sample: &[f64],
    estimator: Estimator,
    config: &EstimatorConfig,
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<FitReport> {
    validate_sample(sample)?;
    let est = estimator.estimate(sample, config)?;
    let shifted = shift_sample(sample, est.c_hat);
    let mut warnings = est.warnings;
    warnings.extend(shifted.warnings);
    fit_on(family, Method::Estimated(estimator), &shifted.values, Some(est.c_hat), grid, settings, warnings)
}

/// Optimizes θ only; the location is `m̄ − F_min⁻¹(q_min | θ)`, placing the
/// sample minimum at the `q_min` quantile of the minimum's law.
pub fn fit_iterated_c(
    family: &dyn Family,
    sample: &[f64],
    grid: &GridSpec,
    settings: &OptimizerSettings,
    q_min: f64,
) -> Result<FitReport> {
    let method = Method::IteratedC;
    validate_sample(sample)?;
    settings.validate()?;
    let level = min_level(sample.len(), q_min)?;
    if let Some(err) = degenerate(family, method, sample, Vec::new()) {
        return Err(err);
    }
    let m = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let reference = match estimate_c2(sample) {
        Ok(e) => shift_sample(sample, e.c_hat).values,
        Err(_) => sample.to_vec(),
    };
    let tr = transforms(family);
    let penalty = settings.penalty_value;
    let n_theta = family.param_count();
    let implied_c = |theta: &[f64]| -> Option<f64> {
        let q = family.quantile_unchecked(theta, level);
        let c = m - q;
        c.is_finite().then_some(c)
    };
    let starts = grid
        .points(family, &reference)
        .into_iter()
        .map(|init| {
            let start = run_start(init.0, &tr, settings, |p| {
                if !in_domain(family, p) {
                    return penalty;
                }
                match implied_c(p) {
                    Some(c) => shifted_loglik(family, p, sample, c, penalty),
                    None => penalty,
                }
            });
            let c_hat = implied_c(&start.optimum.x).unwrap_or(f64::NAN);
            outcome(family, method, start, penalty, Some(c_hat), n_theta)
        })
        .collect();
    select(family, method, starts, Vec::new())
}

/// Runs `method` end to end.
pub fn fit(
    family: &dyn Family,
    method: Method,
    sample: &[f64],
    config: &EstimatorConfig,
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<FitReport> {
    match method {
        Method::Standard => fit_standard(family, sample, grid, settings),
        Method::InferC => fit_infer_c(family, sample, grid, settings),
        Method::Estimated(e) => fit_with_estimator(family, sample, e, config, grid, settings),
        Method::IteratedC => {
            config.validate()?;
            fit_iterated_c(family, sample, grid, settings, config.q_min)
        }
    }
}

/// A fitted family placed at its location: density `f(x − c | θ)`.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub family: FamilyRef,
    pub params: ParamVector,
    pub shift: f64,
}

impl FittedModel {
    pub fn from_outcome(family: FamilyRef, outcome: &FitOutcome) -> Self {
        FittedModel { family, params: outcome.params.clone(), shift: outcome.shift() }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.family.ln_pdf_unchecked(&self.params, x - self.shift)
    }

    /// Log-likelihood of `data`, with points of zero density scored at
    /// `penalty` each.
    pub fn loglik(&self, data: &[f64], penalty: f64) -> f64 {
        data.iter()
            .map(|x| {
                let v = self.ln_pdf(*x);
                if v.is_finite() {
                    v
                } else {
                    penalty
                }
            })
            .sum()
    }
}
