//! Families on `[0, 1]`, usable as the outer cdf of a composition.

use super::{Family, ParamSpec, Role};
use crate::special::{inc_beta, ln1mexp, ln_add_exp, ln_gamma};

fn outside_unit(u: f64) -> bool {
    !(0.0..=1.0).contains(&u)
}

/// Uniform on `[0, 1]`; its cdf is the identity.
#[derive(Debug, Clone, Default)]
pub struct Uniform01;

impl Family for Uniform01 {
    fn name(&self) -> &str {
        "uniform"
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &[]
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn ln_pdf_unchecked(&self, _p: &[f64], u: f64) -> f64 {
        if outside_unit(u) {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }
    fn cdf_unchecked(&self, _p: &[f64], u: f64) -> f64 {
        u.clamp(0.0, 1.0)
    }
    fn quantile_unchecked(&self, _p: &[f64], q: f64) -> f64 {
        q
    }
}

/// Beta with shapes `(a, b)`.
#[derive(Debug, Clone)]
pub struct Beta {
    specs: Vec<ParamSpec>,
}

impl Beta {
    pub fn new() -> Self {
        Beta { specs: vec![ParamSpec::positive("a", Role::Shape), ParamSpec::positive("b", Role::Shape)] }
    }
}

impl Default for Beta {
    fn default() -> Self {
        Self::new()
    }
}

impl Family for Beta {
    fn name(&self) -> &str {
        "beta"
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn ln_pdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        if outside_unit(u) {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (p[0], p[1]);
        super::xlny(a - 1.0, u) + super::xlny(b - 1.0, 1.0 - u) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
    }
    fn cdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        inc_beta(p[0], p[1], u)
    }
}

/// Kumaraswamy with shapes `(a, b)`: `G(u) = 1 - (1 - u^a)^b`.
#[derive(Debug, Clone)]
pub struct Kumaraswamy {
    specs: Vec<ParamSpec>,
}

impl Kumaraswamy {
    pub fn new() -> Self {
        Kumaraswamy {
            specs: vec![ParamSpec::positive("a", Role::Shape), ParamSpec::positive("b", Role::Shape)],
        }
    }
}

impl Default for Kumaraswamy {
    fn default() -> Self {
        Self::new()
    }
}

impl Family for Kumaraswamy {
    fn name(&self) -> &str {
        "kumaraswamy"
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn ln_pdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        if outside_unit(u) {
            return f64::NEG_INFINITY;
        }
        let (a, b) = (p[0], p[1]);
        let ln_ua = a * u.ln();
        a.ln() + b.ln() + super::xlny(a - 1.0, u) + if b == 1.0 { 0.0 } else { (b - 1.0) * ln1mexp(ln_ua) }
    }
    fn cdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        -(p[1] * ln1mexp(p[0] * u.ln())).exp_m1()
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        (ln1mexp((-q).ln_1p() / p[1]) / p[0]).exp()
    }
}

/// Odd log-logistic on `[0, 1]` with shape `λ`: `G(u) = u^λ / (u^λ + (1 - u)^λ)`.
#[derive(Debug, Clone)]
pub struct OddLogLogistic {
    specs: Vec<ParamSpec>,
}

impl OddLogLogistic {
    pub fn new() -> Self {
        OddLogLogistic { specs: vec![ParamSpec::positive("lambda", Role::Shape)] }
    }
}

impl Default for OddLogLogistic {
    fn default() -> Self {
        Self::new()
    }
}

impl Family for OddLogLogistic {
    fn name(&self) -> &str {
        "oll"
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn ln_pdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        if outside_unit(u) {
            return f64::NEG_INFINITY;
        }
        let lambda = p[0];
        let (lu, lv) = (u.ln(), (-u).ln_1p());
        lambda.ln() + (lambda - 1.0) * (lu + lv) - 2.0 * ln_add_exp(lambda * lu, lambda * lv)
    }
    fn cdf_unchecked(&self, p: &[f64], u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let lambda = p[0];
        let (a, b) = (lambda * u.ln(), lambda * (-u).ln_1p());
        (a - ln_add_exp(a, b)).exp()
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        let (a, b) = (q.ln() / p[0], (-q).ln_1p() / p[0]);
        (a - ln_add_exp(a, b)).exp()
    }
}
