//! Continuous distribution families over the real line.
//!
//! A [`Family`] is a parametrized density; parameter values travel separately
//! as plain slices (or a [`ParamVector`]) so a single family object can be
//! shared by every optimizer start, thread and sample set. Families are built
//! in log space: [`Family::ln_pdf_unchecked`] is the primitive, densities are
//! never exponentiated and re-logged.
//!
//! Built-in families are reachable by their registry names through
//! [`builtin`]; constructions that produce new families from old ones live in
//! [`compose_cdf`], [`truncate_at`], [`shift_by`] and [`freeze`].

mod builtin;
mod construct;
mod unit;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use builtin::{EWeibull, GenGamma, Gamma, KwCwg, LogNormal, Normal, OllGg, TruncNormal, Weibull};
pub use construct::{compose_cdf, freeze, shift_by, truncate_at, Composed, Frozen, Shifted, Truncated};
pub use unit::{Beta, Kumaraswamy, OddLogLogistic, Uniform01};

/// Shared handle to a family.
pub type FamilyRef = Arc<dyn Family>;

/// Where a parameter is allowed to live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// `(0, ∞)`
    Positive,
    /// `(-∞, ∞)`
    Real,
    /// `(0, 1)`
    UnitOpen,
}

impl Domain {
    pub fn contains(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Domain::Positive => v > 0.0,
                Domain::Real => true,
                Domain::UnitOpen => v > 0.0 && v < 1.0,
            }
    }
}

/// What a parameter does, used to place default starting points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Shape,
    Scale,
    /// Multiplies the argument, as `γ` in `(γx)^β`.
    InverseScale,
    Mean,
    StdDev,
    LogMean,
    LogStdDev,
    /// A shape living in `(0, 1)`.
    UnitShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub domain: Domain,
    pub role: Role,
}

impl ParamSpec {
    pub fn new(name: &str, domain: Domain, role: Role) -> Self {
        ParamSpec { name: name.to_string(), domain, role }
    }
    pub(crate) fn positive(name: &str, role: Role) -> Self {
        Self::new(name, Domain::Positive, role)
    }
}

/// Ordered parameter values for one family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

impl std::ops::Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl From<&[f64]> for ParamVector {
    fn from(v: &[f64]) -> Self {
        ParamVector(v.to_vec())
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Location and spread summaries of a sample, used to centre default grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleScale {
    pub mean: f64,
    pub sd: f64,
    pub log_mean: f64,
    pub log_sd: f64,
}

impl SampleScale {
    /// The data-independent reference: unit mean and spread.
    pub fn unit() -> Self {
        SampleScale { mean: 1.0, sd: 1.0, log_mean: 0.0, log_sd: 1.0 }
    }

    /// Summaries of `sample`, with fallbacks that keep every derived grid
    /// point strictly inside its domain.
    pub fn of(sample: &[f64]) -> Self {
        let (mean, sd) = mean_sd(sample);
        let positive: Vec<f64> = sample.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
        let (log_mean, log_sd) = if positive.is_empty() { (0.0, 0.0) } else { mean_sd(&positive) };

        let scale = if mean.is_finite() && mean.abs() > 0.0 { mean.abs() } else { 1.0 };
        let sd = if sd.is_finite() && sd > 0.0 { sd } else { 0.1 * scale };
        let log_mean = if log_mean.is_finite() { log_mean } else { 0.0 };
        let log_sd = if log_sd.is_finite() && log_sd > 0.0 { log_sd } else { 0.1 };
        SampleScale { mean: if mean.is_finite() { mean } else { 1.0 }, sd, log_mean, log_sd }
    }

    /// Positive magnitude used for scale-like parameters.
    pub fn magnitude(&self) -> f64 {
        if self.mean.abs() > 0.0 {
            self.mean.abs()
        } else {
            1.0
        }
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Starting values for one parameter, three per parameter.
fn role_candidates(role: Role, s: &SampleScale) -> [f64; 3] {
    let m = s.magnitude();
    match role {
        Role::Shape => [0.5, 1.0, 2.0],
        Role::Scale => [0.5 * m, m, 2.0 * m],
        Role::InverseScale => [0.5 / m, 1.0 / m, 2.0 / m],
        Role::Mean => [s.mean - s.sd, s.mean, s.mean + s.sd],
        Role::StdDev => [0.5 * s.sd, s.sd, 2.0 * s.sd],
        Role::LogMean => [s.log_mean - s.log_sd, s.log_mean, s.log_mean + s.log_sd],
        Role::LogStdDev => [0.5 * s.log_sd, s.log_sd, 2.0 * s.log_sd],
        Role::UnitShape => [0.25, 0.5, 0.75],
    }
}

/// A parametrized continuous distribution.
///
/// Implementors supply the `*_unchecked` primitives; the checked wrappers
/// validate parameters first. `*_unchecked` methods may assume the parameter
/// slice has the right length and lies inside the declared domains.
pub trait Family: fmt::Debug + Send + Sync {
    /// Registry key, e.g. `"gamma"`.
    fn name(&self) -> &str;

    fn param_specs(&self) -> &[ParamSpec];

    /// `(lower, upper)` bounds of the support, independent of parameters.
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    /// Natural log of the density; `-inf` outside the support.
    fn ln_pdf_unchecked(&self, p: &[f64], x: f64) -> f64;

    fn cdf_unchecked(&self, p: &[f64], x: f64) -> f64;

    /// `1 - cdf`, overridden where a direct form keeps tail precision.
    fn sf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        1.0 - self.cdf_unchecked(p, x)
    }

    fn ln_sf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        self.sf_unchecked(p, x).ln()
    }

    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        numeric_quantile(self, p, q)
    }

    /// Inverse survival function: the `x` with `sf(x) = s`.
    fn isf_unchecked(&self, p: &[f64], s: f64) -> f64 {
        self.quantile_unchecked(p, 1.0 - s)
    }

    fn param_count(&self) -> usize {
        self.param_specs().len()
    }

    /// Domain check for a parameter vector.
    fn check(&self, p: &[f64]) -> Result<()> {
        let specs = self.param_specs();
        if p.len() != specs.len() {
            return Err(domain(format!(
                "{} takes {} parameters, got {}",
                self.name(),
                specs.len(),
                p.len()
            )));
        }
        for (v, spec) in p.iter().zip(specs) {
            if !spec.domain.contains(*v) {
                return Err(domain(format!(
                    "{}: parameter {} = {} outside {:?}",
                    self.name(),
                    spec.name,
                    v,
                    spec.domain
                )));
            }
        }
        Ok(())
    }

    fn log_pdf(&self, p: &[f64], x: f64) -> Result<f64> {
        self.check(p)?;
        Ok(self.ln_pdf_unchecked(p, x))
    }

    fn cdf(&self, p: &[f64], x: f64) -> Result<f64> {
        self.check(p)?;
        Ok(self.cdf_unchecked(p, x).clamp(0.0, 1.0))
    }

    fn quantile(&self, p: &[f64], q: f64) -> Result<f64> {
        self.check(p)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        Ok(self.quantile_unchecked(p, q))
    }

    /// `n` variates by inverse transform, reproducible for a given `seed`.
    fn draw(&self, p: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
        self.check(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = rng.gen();
            if u > 0.0 {
                out.push(self.quantile_unchecked(p, u));
            }
        }
        Ok(out)
    }

    /// Cartesian product of three starting values per parameter.
    fn default_grid(&self, scale: &SampleScale) -> Vec<ParamVector> {
        let mut grid = vec![Vec::new()];
        for spec in self.param_specs() {
            let cands = role_candidates(spec.role, scale);
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    cands.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(*c);
                        v
                    })
                })
                .collect();
        }
        grid.into_iter().map(ParamVector).collect()
    }
}

/// Registry names of the built-in families.
pub const BUILTIN_NAMES: [&str; 9] =
    ["weibull", "gamma", "ggamma", "eweibull", "normal", "tnormal", "lnormal", "kwcwg", "ollgg"];

/// Looks up a built-in family by registry name.
pub fn builtin(name: &str) -> Option<FamilyRef> {
    Some(match name {
        "weibull" => Arc::new(Weibull::new()),
        "gamma" => Arc::new(Gamma::new()),
        "ggamma" => Arc::new(GenGamma::new()),
        "eweibull" => Arc::new(EWeibull::new()),
        "normal" => Arc::new(Normal::new()),
        "tnormal" => Arc::new(TruncNormal::new()),
        "lnormal" => Arc::new(LogNormal::new()),
        "kwcwg" => Arc::new(KwCwg::new()),
        "ollgg" => Arc::new(OllGg::new()),
        _ => return None,
    })
}

/// All built-in families in registry order.
pub fn builtins() -> Vec<FamilyRef> {
    BUILTIN_NAMES.iter().map(|n| builtin(n).expect("registry name")).collect()
}

const QUANTILE_MAX_ITER: usize = 200;
const EXPANSION_LIMIT: usize = 2100;

/// Quantile by bracketing then bisection on the cdf.
///
/// The bracket grows geometrically from 1 (or outward from 0 on the real
/// line); the lower tail is compared through the cdf and the upper tail
/// through the survival function so both ends keep their precision.
pub fn numeric_quantile<F: Family + ?Sized>(family: &F, p: &[f64], q: f64) -> f64 {
    let (lower, upper) = family.support();
    let below = |x: f64| -> bool {
        // true when x lies left of the target quantile
        if q <= 0.5 {
            family.cdf_unchecked(p, x) < q
        } else {
            family.sf_unchecked(p, x) > 1.0 - q
        }
    };

    let (mut lo, mut hi);
    if lower.is_finite() && upper.is_infinite() {
        let span = 1.0f64;
        hi = lower + span;
        let mut steps = 0;
        while below(hi) && steps < EXPANSION_LIMIT {
            hi = lower + (hi - lower) * 2.0;
            steps += 1;
        }
        lo = lower + (hi - lower) * 0.5;
        steps = 0;
        while !below(lo) && steps < EXPANSION_LIMIT && lo > lower {
            lo = lower + (lo - lower) * 0.5;
            steps += 1;
        }
        if !below(lo) {
            return lo;
        }
    } else if lower.is_finite() && upper.is_finite() {
        lo = lower;
        hi = upper;
    } else {
        let mut width = 1.0f64;
        lo = -width;
        hi = width;
        let mut steps = 0;
        while (below(hi) || !below(lo)) && steps < EXPANSION_LIMIT {
            width *= 2.0;
            lo = -width;
            hi = width;
            steps += 1;
        }
    }

    for _ in 0..QUANTILE_MAX_ITER {
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if hi < 0.0 && lo / hi > 4.0 {
            -(lo * hi).sqrt()
        } else {
            lo + 0.5 * (hi - lo)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}

/// `ln f(x)` with domain checking, as a free function.
pub fn log_pdf(family: &dyn Family, params: &[f64], x: f64) -> Result<f64> {
    family.log_pdf(params, x)
}

pub fn cdf(family: &dyn Family, params: &[f64], x: f64) -> Result<f64> {
    family.cdf(params, x)
}

pub fn quantile(family: &dyn Family, params: &[f64], q: f64) -> Result<f64> {
    family.quantile(params, q)
}

pub fn draw(family: &dyn Family, params: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    family.draw(params, n, seed)
}

/// `a · ln(x)` with the convention `0 · ln 0 = 0`.
pub(crate) fn xlny(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

#[cfg(test)]
mod tests;
