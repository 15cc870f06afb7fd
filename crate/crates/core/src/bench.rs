//! Timing aggregates over optimization starts, with percentile-bootstrap
//! confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mle::{FitOutcome, Method};

/// Per-start timings of one (family, method) cell, in nanoseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingAggregate {
    pub family: String,
    pub method: Method,
    pub n_starts: usize,
    pub n_converged: usize,
    pub mean_all_ns: u64,
    /// Absent when no start converged.
    pub mean_converged_ns: Option<u64>,
    pub ci_all_ns: (u64, u64),
    pub ci_converged_ns: Option<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings { level: 0.95, resamples: 1000, seed: 0 }
    }
}

/// Type-7 (linear interpolation) quantile of sorted values.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for the mean of `values`.
///
/// ```
/// let (lo, hi) = locfit::bench::bootstrap_ci(&[3.0; 5], 0.95, 1000, 1).unwrap();
/// assert_eq!((lo, hi), (3.0, 3.0));
/// ```
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Contract("bootstrap of an empty list".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if resamples == 0 {
        return Err(domain("at least one bootstrap resample is required"));
    }
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((sorted_quantile(&means, tail), sorted_quantile(&means, 1.0 - tail)))
}

fn mean_ns(values: &[u64]) -> u64 {
    let sum: u128 = values.iter().map(|v| *v as u128).sum();
    let n = values.len() as u128;
    ((sum + n / 2) / n) as u64
}

fn ci_ns(values: &[u64], boot: &BootstrapSettings) -> Result<(u64, u64)> {
    // sorting first makes the interval independent of input order
    let mut sorted: Vec<f64> = values.iter().map(|v| *v as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = bootstrap_ci(&sorted, boot.level, boot.resamples, boot.seed)?;
    Ok((lo.floor() as u64, hi.ceil() as u64))
}

/// Means and bootstrap intervals over all starts and over converged starts.
pub fn aggregate_timings(outcomes: &[FitOutcome], boot: &BootstrapSettings) -> Result<TimingAggregate> {
    let first = outcomes.first().ok_or_else(|| Error::Contract("no outcomes to aggregate".into()))?;
    if outcomes.iter().any(|o| o.family != first.family || o.method != first.method) {
        return Err(Error::Contract("timing aggregates need outcomes of a single family and method".into()));
    }
    let all: Vec<u64> = outcomes.iter().map(|o| o.elapsed_ns).collect();
    let conv: Vec<u64> = outcomes.iter().filter(|o| o.converged).map(|o| o.elapsed_ns).collect();
    Ok(TimingAggregate {
        family: first.family.clone(),
        method: first.method,
        n_starts: all.len(),
        n_converged: conv.len(),
        mean_all_ns: mean_ns(&all),
        mean_converged_ns: (!conv.is_empty()).then(|| mean_ns(&conv)),
        ci_all_ns: ci_ns(&all, boot)?,
        ci_converged_ns: if conv.is_empty() { None } else { Some(ci_ns(&conv, boot)?) },
    })
}
