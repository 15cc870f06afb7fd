//! Information criteria, cross-validated likelihood, and cross-method
//! comparison tables.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::distributions::FamilyRef;
use crate::error::{domain, Error, Result};
use crate::location::EstimatorConfig;
use crate::mle::{fit, FitOutcome, FittedModel, GridSpec, Method, OptimizerSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub neg2l: f64,
    pub aic: f64,
    pub caic: f64,
    pub hqic: f64,
    pub bic: f64,
    pub cv_neg2l: Option<f64>,
    pub k: usize,
    pub n: usize,
}

impl MetricSet {
    /// All criteria from `−2l̂`, the charged parameter count and the sample
    /// size.
    ///
    /// ```
    /// let m = locfit::selection::MetricSet::new(10.0, 2, 100).unwrap();
    /// assert_eq!(m.aic, 14.0);
    /// assert!((m.caic - (10.0 + 400.0 / 97.0)).abs() < 1e-12);
    /// ```
    pub fn new(neg2l: f64, k: usize, n: usize) -> Result<Self> {
        if n <= k + 1 {
            return Err(domain(format!("CAIC undefined: need n > k + 1, got n = {n}, k = {k}")));
        }
        let (kf, nf) = (k as f64, n as f64);
        Ok(MetricSet {
            neg2l,
            aic: neg2l + 2.0 * kf,
            caic: neg2l + 2.0 * kf * nf / (nf - kf - 1.0),
            hqic: neg2l + 2.0 * kf * nf.ln().ln(),
            bic: neg2l + kf * nf.ln(),
            cv_neg2l: None,
            k,
            n,
        })
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Neg2l => Some(self.neg2l),
            Metric::Aic => Some(self.aic),
            Metric::Caic => Some(self.caic),
            Metric::Hqic => Some(self.hqic),
            Metric::Bic => Some(self.bic),
            Metric::CvNeg2l => self.cv_neg2l,
        }
    }
}

/// Criteria for a fit on `n` points; `inferC` is charged one extra parameter.
pub fn metrics(fit: &FitOutcome, n: usize) -> Result<MetricSet> {
    MetricSet::new(fit.neg2l, fit.k(), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Neg2l,
    Aic,
    Caic,
    Hqic,
    Bic,
    CvNeg2l,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Neg2l, Metric::Aic, Metric::Caic, Metric::Hqic, Metric::Bic, Metric::CvNeg2l];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Neg2l => "neg2l",
            Metric::Aic => "aic",
            Metric::Caic => "caic",
            Metric::Hqic => "hqic",
            Metric::Bic => "bic",
            Metric::CvNeg2l => "cv_neg2l",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| domain(format!("unknown metric {s:?}")))
    }
}

/// Seeded permutation of `0..n` cut into `folds` contiguous pieces whose
/// sizes differ by at most one.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(domain(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::SampleTooSmall { needed: folds, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for i in 0..folds {
        let len = base + usize::from(i < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// Mean over folds of the held-out `−2l̂`.
    pub mean_neg2l: f64,
    pub per_fold: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

/// Fits on each fold's complement with the whole method pipeline (the
/// location is re-estimated from training data only) and scores the
/// held-out points under the fitted, shifted model.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    family: &FamilyRef,
    method: Method,
    sample: &[f64],
    folds: usize,
    seed: u64,
    config: &EstimatorConfig,
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<CrossValidation> {
    let parts = fold_partition(sample.len(), folds, seed)?;
    let mut per_fold = Vec::with_capacity(folds);
    for (i, test_idx) in parts.iter().enumerate() {
        let held: BTreeSet<usize> = test_idx.iter().copied().collect();
        let train: Vec<f64> =
            sample.iter().enumerate().filter(|(j, _)| !held.contains(j)).map(|(_, x)| *x).collect();
        let test: Vec<f64> = test_idx.iter().map(|j| sample[*j]).collect();
        let report = fit(family.as_ref(), method, &train, config, grid, settings)
            .map_err(|e| Error::CvFailed { fold: i, source: Box::new(e) })?;
        let model = FittedModel::from_outcome(family.clone(), &report.best);
        per_fold.push(-2.0 * model.loglik(&test, settings.penalty_value));
    }
    let mean_neg2l = per_fold.iter().sum::<f64>() / folds as f64;
    Ok(CrossValidation { mean_neg2l, per_fold, folds, seed })
}

/// Mean held-out `−2l̂` over `folds` folds.
#[allow(clippy::too_many_arguments)]
pub fn cross_validated_neg2l(
    family: &FamilyRef,
    method: Method,
    sample: &[f64],
    folds: usize,
    seed: u64,
    config: &EstimatorConfig,
    grid: &GridSpec,
    settings: &OptimizerSettings,
) -> Result<f64> {
    Ok(cross_validate(family, method, sample, folds, seed, config, grid, settings)?.mean_neg2l)
}

/// One fitted cell of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub set: String,
    pub family: String,
    pub method: Method,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub set: String,
    pub family: String,
    pub method: Method,
    pub value: f64,
    /// `best − value`: zero for the winner, negative otherwise.
    pub delta: f64,
}

/// Ranking order within a sample set: lower metric, then fewer
/// parameters, then family name, then method name.
fn rank_key<'a>(row: &'a Row, metric: Metric) -> Option<(f64, usize, &'a str, &'static str)> {
    let v = row.metrics.get(metric)?;
    (!v.is_nan()).then_some((v, row.metrics.k, row.family.as_str(), row.method.as_str()))
}

fn cmp_keys(a: &(f64, usize, &str, &str), b: &(f64, usize, &str, &str)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)).then(a.3.cmp(b.3))
}

fn by_set(rows: &[Row]) -> BTreeMap<&str, Vec<&Row>> {
    let mut sets: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        sets.entry(r.set.as_str()).or_default().push(r);
    }
    sets
}

/// Per sample set, each row's distance from the set's best value of
/// `metric`. Rows without the metric are skipped.
pub fn quality_deltas(rows: &[Row], metric: Metric) -> Vec<Delta> {
    let mut out = Vec::new();
    for (set, members) in by_set(rows) {
        let scored: Vec<(&Row, f64)> =
            members.iter().filter_map(|r| r.metrics.get(metric).filter(|v| !v.is_nan()).map(|v| (*r, v))).collect();
        let Some(best) = scored.iter().map(|(_, v)| *v).min_by(f64::total_cmp) else { continue };
        for (r, v) in scored {
            let delta = if v == best { 0.0 } else { best - v };
            out.push(Delta { set: set.to_string(), family: r.family.clone(), method: r.method, value: v, delta });
        }
    }
    out
}

/// For every (sample set, method), the row of the best family under
/// `metric`.
pub fn best_family_per_method(rows: &[Row], metric: Metric) -> Vec<Row> {
    let mut best: BTreeMap<(&str, Method), &Row> = BTreeMap::new();
    for r in rows {
        let Some(key) = rank_key(r, metric) else { continue };
        let slot = best.entry((r.set.as_str(), r.method)).or_insert(r);
        let current = rank_key(slot, metric).expect("ranked row");
        if cmp_keys(&key, &current).is_lt() {
            *slot = r;
        }
    }
    best.into_values().cloned().collect()
}

/// How often each (family, method) takes `place` (1 or 2) within its sample
/// set under `metric`.
pub fn win_counts(rows: &[Row], metric: Metric, place: usize) -> Result<BTreeMap<(String, Method), usize>> {
    if place != 1 && place != 2 {
        return Err(domain(format!("place must be 1 or 2, got {place}")));
    }
    let mut counts = BTreeMap::new();
    for r in rows {
        counts.entry((r.family.clone(), r.method)).or_insert(0);
    }
    for members in by_set(rows).into_values() {
        let mut ranked: Vec<_> = members.iter().filter_map(|r| rank_key(r, metric).map(|k| (k, *r))).collect();
        ranked.sort_by(|a, b| cmp_keys(&a.0, &b.0));
        if let Some((_, r)) = ranked.get(place - 1) {
            *counts.entry((r.family.clone(), r.method)).or_insert(0) += 1;
        }
    }
    Ok(counts)
}
