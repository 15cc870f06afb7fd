//! Estimators of the populational minimum, and the law of the sample minimum
//! they rest on.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Tuning knobs shared by the location estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Base of the logarithm in `ĉ₁`.
    pub k_base: f64,
    /// Confidence parameter of `ĉ₄`.
    pub nu: f64,
    /// Quantile of the minimum targeted by the iterated method.
    pub q_min: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { k_base: 10.0, nu: 0.05, q_min: 0.5 }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_base > 1.0 && self.k_base.is_finite()) {
            return Err(domain(format!("k_base must exceed 1, got {}", self.k_base)));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(domain(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        if !(self.q_min > 0.0 && self.q_min < 1.0) {
            return Err(domain(format!("q_min must lie in (0, 1), got {}", self.q_min)));
        }
        Ok(())
    }
}

/// The four closed-form estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "c1")]
    C1,
    #[serde(rename = "c2")]
    C2,
    #[serde(rename = "c3")]
    C3,
    #[serde(rename = "c4")]
    C4,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::C1, Estimator::C2, Estimator::C3, Estimator::C4];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::C1 => "c1",
            Estimator::C2 => "c2",
            Estimator::C3 => "c3",
            Estimator::C4 => "c4",
        }
    }

    pub fn estimate(self, sample: &[f64], config: &EstimatorConfig) -> Result<LocationEstimate> {
        match self {
            Estimator::C1 => estimate_c1(sample, config),
            Estimator::C2 => estimate_c2(sample),
            Estimator::C3 => estimate_c3(sample),
            Estimator::C4 => estimate_c4(sample, config),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| domain(format!("unknown estimator {s:?}; expected one of c1, c2, c3, c4")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationEstimate {
    pub c_hat: f64,
    pub method: Estimator,
    pub sample_min: f64,
    pub sample_size: usize,
    pub config_used: EstimatorConfig,
    pub warnings: Vec<String>,
}

struct Summary {
    min: f64,
    mean: f64,
    sd: f64,
    n: usize,
}

fn summarize(sample: &[f64], needed: usize) -> Result<Summary> {
    let n = sample.len();
    if n < needed {
        return Err(Error::SampleTooSmall { needed, got: n });
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(domain(format!("sample contains non-finite value {bad}")));
    }
    let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = sample.iter().sum::<f64>() / n as f64;
    let ss: f64 = sample.iter().map(|x| (x - mean).powi(2)).sum();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    Ok(Summary { min, mean, sd, n })
}

/// Sample standard deviation (n − 1 denominator) over the sample mean.
///
/// ```
/// let cv = locfit::location::coefficient_of_variation(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
/// assert!((cv - 2.5f64.sqrt() / 3.0).abs() < 1e-15);
/// ```
pub fn coefficient_of_variation(sample: &[f64]) -> Result<f64> {
    let s = summarize(sample, 2)?;
    if s.mean == 0.0 {
        return Err(Error::UndefinedCv);
    }
    Ok(s.sd / s.mean)
}

fn finish(method: Estimator, s: &Summary, pull: f64, config: EstimatorConfig) -> LocationEstimate {
    let mut warnings = Vec::new();
    if s.sd == 0.0 {
        warnings.push(format!("zero-dispersion sample: {method} falls back to the sample minimum"));
    }
    LocationEstimate {
        c_hat: s.min - pull,
        method,
        sample_min: s.min,
        sample_size: s.n,
        config_used: config,
        warnings,
    }
}

/// `m̄ − |m̄·CV| / log_k(n)`.
pub fn estimate_c1(sample: &[f64], config: &EstimatorConfig) -> Result<LocationEstimate> {
    config.validate()?;
    let s = summarize(sample, 2)?;
    let cv = coefficient_of_variation(sample)?;
    let log_k_n = (s.n as f64).ln() / config.k_base.ln();
    Ok(finish(Estimator::C1, &s, (s.min * cv).abs() / log_k_n, *config))
}

/// `m̄ − σ̂ / n`.
pub fn estimate_c2(sample: &[f64]) -> Result<LocationEstimate> {
    let s = summarize(sample, 2)?;
    Ok(finish(Estimator::C2, &s, s.sd / s.n as f64, EstimatorConfig::default()))
}

/// `m̄ − σ̂·√(ln ln n / 2n)`; needs `n ≥ 3`.
pub fn estimate_c3(sample: &[f64]) -> Result<LocationEstimate> {
    let s = summarize(sample, 3)?;
    let n = s.n as f64;
    Ok(finish(Estimator::C3, &s, s.sd * (n.ln().ln() / (2.0 * n)).sqrt(), EstimatorConfig::default()))
}

/// `m̄ − σ̂·√(−ln(ν/2) / 2n)`.
pub fn estimate_c4(sample: &[f64], config: &EstimatorConfig) -> Result<LocationEstimate> {
    config.validate()?;
    let s = summarize(sample, 2)?;
    let n = s.n as f64;
    Ok(finish(Estimator::C4, &s, s.sd * (-(config.nu / 2.0).ln() / (2.0 * n)).sqrt(), *config))
}

/// Cdf of the minimum of `n` i.i.d. draws: `1 − (1 − F(x))ⁿ`.
pub fn min_cdf(base_cdf: impl Fn(f64) -> f64, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    let f = base_cdf(x).clamp(0.0, 1.0);
    Ok(-(n as f64 * (-f).ln_1p()).exp_m1())
}

/// The base-distribution level whose quantile is the `q` quantile of the
/// minimum of `n` draws: `1 − (1 − q)^{1/n}`.
pub fn min_level(n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("quantile level must lie in (0, 1), got {q}")));
    }
    Ok(-((-q).ln_1p() / n as f64).exp_m1())
}

/// Quantile of the minimum of `n` draws.
///
/// ```
/// use locfit::location::min_quantile;
/// // exponential(1): the median of the minimum of ten draws is ln 2 / 10
/// let x = min_quantile(|p| -(-p).ln_1p(), 10, 0.5).unwrap();
/// assert!((x - 2f64.ln() / 10.0).abs() < 1e-15);
/// ```
pub fn min_quantile(base_quantile: impl Fn(f64) -> f64, n: usize, q: f64) -> Result<f64> {
    Ok(base_quantile(min_level(n, q)?))
}

/// A sample with a location subtracted.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted {
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// `x_i − c`, warning when the result touches zero.
pub fn shift_sample(sample: &[f64], c: f64) -> Shifted {
    let values: Vec<f64> = sample.iter().map(|x| x - c).collect();
    let mut warnings = Vec::new();
    if values.iter().any(|v| *v == 0.0) {
        warnings.push(format!(
            "shifting by {c} puts a point at 0; families with f(0) = 0 cannot fit this sample"
        ));
    }
    Shifted { values, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FIVE: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

    #[test]
    fn cv_examples() {
        assert!((coefficient_of_variation(&FIVE).unwrap() - 0.52705).abs() < 1e-5);
        assert_eq!(coefficient_of_variation(&[5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(coefficient_of_variation(&[0.0, 0.0]), Err(Error::UndefinedCv)));
        assert!(matches!(coefficient_of_variation(&[1.0]), Err(Error::SampleTooSmall { .. })));
    }

    // Hand arithmetic, written out independently of the implementation.
    #[test]
    fn estimator_oracles() {
        let cfg = EstimatorConfig::default();
        let sd = 2.5f64.sqrt();
        let c1 = 1.0 - (sd / 3.0) / 5f64.log10();
        let c2 = 1.0 - sd / 5.0;
        let c3 = 1.0 - sd * (5f64.ln().ln() / 10.0).sqrt();
        let c4 = 1.0 - sd * (-(0.025f64).ln() / 10.0).sqrt();
        assert!((estimate_c1(&FIVE, &cfg).unwrap().c_hat - c1).abs() < 1e-12);
        assert!((estimate_c2(&FIVE).unwrap().c_hat - c2).abs() < 1e-12);
        assert!((estimate_c3(&FIVE).unwrap().c_hat - c3).abs() < 1e-12);
        assert!((estimate_c4(&FIVE, &cfg).unwrap().c_hat - c4).abs() < 1e-12);
        // the published five-digit values carry intermediate rounding
        assert!((c1 - 0.24596).abs() < 1e-4);
        assert!((c2 - 0.68377).abs() < 1e-4);
        assert!((c3 - 0.65506).abs() < 1e-4);
        assert!((c4 - 0.03962).abs() < 1e-4);
    }

    #[test]
    fn constant_samples_return_the_minimum_with_a_warning() {
        let cfg = EstimatorConfig::default();
        for e in Estimator::ALL {
            let est = e.estimate(&[7.0; 4], &cfg).unwrap();
            assert_eq!(est.c_hat, 7.0);
            assert_eq!(est.warnings.len(), 1);
        }
    }

    #[test]
    fn negative_samples_pull_left() {
        let est = estimate_c1(&[-3.0, -2.0, -1.0], &EstimatorConfig::default()).unwrap();
        let cv: f64 = 1.0 / -2.0;
        assert!((est.c_hat - (-3.0 - (3.0 * cv).abs() / 3f64.log10())).abs() < 1e-12);
        assert!(est.c_hat < -3.0);
    }

    #[test]
    fn small_samples_and_bad_config_are_rejected() {
        assert!(matches!(estimate_c3(&[1.0, 2.0]), Err(Error::SampleTooSmall { needed: 3, got: 2 })));
        assert!(estimate_c2(&[1.0]).is_err());
        let bad = EstimatorConfig { nu: 1.0, ..Default::default() };
        assert!(estimate_c4(&FIVE, &bad).is_err());
        let bad = EstimatorConfig { k_base: 1.0, ..Default::default() };
        assert!(estimate_c1(&FIVE, &bad).is_err());
    }

    #[test]
    fn duplication_moves_c2_towards_the_minimum() {
        let doubled: Vec<f64> = FIVE.iter().chain(FIVE.iter()).copied().collect();
        assert!(estimate_c2(&doubled).unwrap().c_hat > estimate_c2(&FIVE).unwrap().c_hat);
    }

    #[test]
    fn c4_pull_back_shrinks_as_nu_grows() {
        let at = |nu| estimate_c4(&FIVE, &EstimatorConfig { nu, ..Default::default() }).unwrap().c_hat;
        assert!(at(0.01) < at(0.05) && at(0.05) < at(0.5) && at(0.5) < at(0.999));
    }

    #[test]
    fn min_law_examples() {
        let expo = |x: f64| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() };
        assert!((min_cdf(expo, 10, 2f64.ln() / 10.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(min_cdf(expo, 1, 0.7).unwrap(), expo(0.7));
        assert_eq!(min_cdf(expo, 5, f64::INFINITY).unwrap(), 1.0);
        let q = min_quantile(|p| -(-p).ln_1p(), 10, 0.5).unwrap();
        assert!((q - 0.06931).abs() < 1e-5);
        assert!(min_quantile(|p| p, 3, 0.0).is_err());
        assert!(min_quantile(|p| -(-p).ln_1p(), 10, 1e-12).unwrap() < 1e-12);
    }

    #[test]
    fn simulated_minima_follow_the_min_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let reps = 10_000;
        let mut minima: Vec<f64> = (0..reps)
            .map(|_| (0..10).map(|_| -(1.0 - rng.gen::<f64>()).ln()).fold(f64::INFINITY, f64::min))
            .collect();
        minima.sort_by(f64::total_cmp);
        let mut sup: f64 = 0.0;
        for (i, x) in minima.iter().enumerate() {
            let f = -(-10.0 * x).exp_m1();
            sup = sup.max((f - i as f64 / reps as f64).abs()).max((f - (i + 1) as f64 / reps as f64).abs());
        }
        let band = (-(0.01f64 / 2.0).ln() / (2.0 * reps as f64)).sqrt();
        assert!(sup < band, "{sup} >= {band}");
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_sample(&FIVE, 0.0).values, FIVE.to_vec());
        assert_eq!(shift_sample(&[1.0, 2.0, 3.0], 0.5).values, vec![0.5, 1.5, 2.5]);
        let s = shift_sample(&[1.0, 2.0, 3.0], 1.0);
        assert_eq!(s.values[0], 0.0);
        assert_eq!(s.warnings.len(), 1);
    }

    fn dispersed() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.1f64..100.0, 3..60).prop_filter("needs spread", |v| {
            v.iter().any(|x| (x - v[0]).abs() > 1e-6)
        })
    }

    proptest! {
        #[test]
        fn estimates_lie_strictly_below_the_minimum(v in dispersed()) {
            let cfg = EstimatorConfig::default();
            for e in Estimator::ALL {
                let est = e.estimate(&v, &cfg).unwrap();
                prop_assert!(est.c_hat < est.sample_min);
            }
        }

        #[test]
        fn scale_equivariance(v in dispersed(), a in 0.01f64..100.0) {
            let cfg = EstimatorConfig::default();
            let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
            for e in Estimator::ALL {
                let c = e.estimate(&v, &cfg).unwrap().c_hat;
                let cs = e.estimate(&scaled, &cfg).unwrap().c_hat;
                prop_assert!((cs - a * c).abs() <= 1e-9 * (a * c).abs().max(a));
            }
        }

        #[test]
        fn c4_below_c3_below_c2(v in dispersed()) {
            let n = v.len() as f64;
            let f4 = (-(0.025f64).ln() / (2.0 * n)).sqrt();
            let f3 = (n.ln().ln() / (2.0 * n)).sqrt();
            let cfg = EstimatorConfig::default();
            let c2 = estimate_c2(&v).unwrap().c_hat;
            let c3 = estimate_c3(&v).unwrap().c_hat;
            let c4 = estimate_c4(&v, &cfg).unwrap().c_hat;
            if f4 >= f3 { prop_assert!(c4 <= c3); }
            if f3 >= 1.0 / n { prop_assert!(c3 <= c2); }
        }

        #[test]
        fn pull_back_shrinks_with_n(sd in 0.1f64..10.0, n in 3usize..100_000) {
            let pull = |n: f64| [sd / n, sd * (n.ln().ln() / (2.0 * n)).sqrt(), sd * (-(0.025f64).ln() / (2.0 * n)).sqrt()];
            let (a, b) = (pull(n as f64), pull((n + 1) as f64));
            prop_assert!(b[0] < a[0]);
            prop_assert!(b[2] < a[2]);
            // ln ln n / n peaks near n = e^e ≈ 15
            if n >= 16 { prop_assert!(b[1] < a[1]); }
        }

        #[test]
        fn min_quantile_round_trips(n in 1usize..1000, q in 0.001f64..0.999) {
            let base_q = |p: f64| -(-p).ln_1p();
            let base_f = |x: f64| -(-x).exp_m1();
            let x = min_quantile(base_q, n, q).unwrap();
            prop_assert!((min_cdf(base_f, n, x).unwrap() - q).abs() < 1e-12);
        }
    }
}
