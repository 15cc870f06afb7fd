//! New families from old: cdf composition, truncation, shifting and freezing.

use super::{Family, FamilyRef, ParamSpec};
use crate::error::{domain, Error, Result};

/// `G ∘ F`: the outer cdf `G` on `[0, 1]` applied to the inner cdf `F`.
///
/// Parameters are the inner family's followed by the outer family's. The
/// density follows from the chain rule, `g(F(x)) · f(x)`, and the quantile is
/// `F⁻¹(G⁻¹(q))`.
#[derive(Debug, Clone)]
pub struct Composed {
    name: String,
    outer: FamilyRef,
    inner: FamilyRef,
    specs: Vec<ParamSpec>,
    split: usize,
}

/// Builds `outer ∘ inner`; the outer family must be supported on `[0, 1]`.
pub fn compose_cdf(outer: FamilyRef, inner: FamilyRef) -> Result<Composed> {
    if outer.support() != (0.0, 1.0) {
        return Err(Error::Contract(format!(
            "outer family {} must be supported on [0, 1], has {:?}",
            outer.name(),
            outer.support()
        )));
    }
    let mut specs = inner.param_specs().to_vec();
    specs.extend_from_slice(outer.param_specs());
    Ok(Composed {
        name: format!("{}-{}", outer.name(), inner.name()),
        split: inner.param_count(),
        outer,
        inner,
        specs,
    })
}

impl Composed {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn halves<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        p.split_at(self.split)
    }
}

impl Family for Composed {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn ln_pdf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        let (pi, po) = self.halves(p);
        let inner = self.inner.ln_pdf_unchecked(pi, x);
        if inner == f64::NEG_INFINITY {
            return inner;
        }
        let u = self.inner.cdf_unchecked(pi, x);
        self.outer.ln_pdf_unchecked(po, u) + inner
    }
    fn cdf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        let (pi, po) = self.halves(p);
        self.outer.cdf_unchecked(po, self.inner.cdf_unchecked(pi, x))
    }
    fn sf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        let (pi, po) = self.halves(p);
        self.outer.sf_unchecked(po, self.inner.cdf_unchecked(pi, x))
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        let (pi, po) = self.halves(p);
        let u = self.outer.quantile_unchecked(po, q);
        let (lo, hi) = self.inner.support();
        if u <= 0.0 {
            lo
        } else if u >= 1.0 {
            hi
        } else {
            self.inner.quantile_unchecked(pi, u)
        }
    }
}

/// The base family conditioned on exceeding `c`, re-origined so the result
/// lives on `[0, ∞)`: `f(y + c) / (1 - F(c))`.
///
/// The normalizer `1 - F(c)` is either recomputed at every parameter point
/// (the conditional family) or held at the parameters the truncation was
/// built from, in which case the log-likelihood is the base log-likelihood
/// of `y + c` plus the constant `-n·ln(1 - F(c))`.
#[derive(Debug, Clone)]
pub struct Truncated {
    name: String,
    base: FamilyRef,
    cut: f64,
    fixed_ln_mass: Option<f64>,
}

/// Truncates `family` at `c`, with the normalizer evaluated at `params`.
pub fn truncate_at(family: FamilyRef, params: &[f64], c: f64) -> Result<Truncated> {
    family.check(params)?;
    if !c.is_finite() {
        return Err(domain(format!("truncation point must be finite, got {c}")));
    }
    let ln_mass = family.ln_sf_unchecked(params, c);
    if ln_mass == f64::NEG_INFINITY || ln_mass.is_nan() {
        return Err(Error::Degenerate(format!(
            "{} has no mass above {c} at parameters {params:?}",
            family.name()
        )));
    }
    let mut t = Truncated::new(family, c);
    t.fixed_ln_mass = Some(ln_mass);
    Ok(t)
}

impl Truncated {
    /// The conditional family: the normalizer follows the parameters, and
    /// parameter points with no mass above `c` evaluate to zero density.
    pub fn new(base: FamilyRef, cut: f64) -> Self {
        Truncated { name: format!("trunc-{}", base.name()), base, cut, fixed_ln_mass: None }
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    /// `ln(1 - F(c))`, held fixed or at `p`.
    pub fn ln_mass(&self, p: &[f64]) -> f64 {
        self.fixed_ln_mass.unwrap_or_else(|| self.base.ln_sf_unchecked(p, self.cut))
    }
}

impl Family for Truncated {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_specs(&self) -> &[ParamSpec] {
        self.base.param_specs()
    }
    fn ln_pdf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        if y < 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_mass = self.ln_mass(p);
        if ln_mass == f64::NEG_INFINITY || ln_mass.is_nan() {
            return f64::NEG_INFINITY;
        }
        self.base.ln_pdf_unchecked(p, y + self.cut) - ln_mass
    }
    fn cdf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        -self.ln_sf_unchecked(p, y).exp_m1()
    }
    fn sf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        self.ln_sf_unchecked(p, y).exp()
    }
    fn ln_sf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        (self.base.ln_sf_unchecked(p, y + self.cut) - self.ln_mass(p)).min(0.0)
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        let ln_mass = self.ln_mass(p);
        let x = if ln_mass < -std::f64::consts::LN_2 {
            self.base.isf_unchecked(p, ((-q).ln_1p() + ln_mass).exp())
        } else {
            let below = -ln_mass.exp_m1();
            self.base.quantile_unchecked(p, below + q * ln_mass.exp())
        };
        (x - self.cut).max(0.0)
    }
}

/// The base family translated right by `c`: support `[lower + c, ∞)`.
#[derive(Debug, Clone)]
pub struct Shifted {
    name: String,
    base: FamilyRef,
    shift: f64,
}

pub fn shift_by(family: FamilyRef, c: f64) -> Shifted {
    Shifted { name: format!("shift-{}", family.name()), base: family, shift: c }
}

impl Shifted {
    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl Family for Shifted {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_specs(&self) -> &[ParamSpec] {
        self.base.param_specs()
    }
    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (lo + self.shift, hi + self.shift)
    }
    fn ln_pdf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        let x = y - self.shift;
        if x < self.base.support().0 {
            return f64::NEG_INFINITY;
        }
        self.base.ln_pdf_unchecked(p, x)
    }
    fn cdf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        self.base.cdf_unchecked(p, y - self.shift)
    }
    fn sf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        self.base.sf_unchecked(p, y - self.shift)
    }
    fn ln_sf_unchecked(&self, p: &[f64], y: f64) -> f64 {
        self.base.ln_sf_unchecked(p, y - self.shift)
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        self.shift + self.base.quantile_unchecked(p, q)
    }
    fn isf_unchecked(&self, p: &[f64], s: f64) -> f64 {
        self.shift + self.base.isf_unchecked(p, s)
    }
}

/// The base family with some parameters held at fixed values.
#[derive(Debug, Clone)]
pub struct Frozen {
    name: String,
    base: FamilyRef,
    fixed: Vec<Option<f64>>,
    specs: Vec<ParamSpec>,
}

/// Holds `(index, value)` pairs of `family`'s parameters fixed.
///
/// ```
/// use locfit::distributions::{builtin, freeze, Family};
/// // The exponential as a gamma with shape fixed at 1.
/// let expo = freeze(builtin("gamma").unwrap(), &[(0, 1.0)]).unwrap();
/// assert_eq!(expo.param_count(), 1);
/// let lp = expo.log_pdf(&[2.0], 1.0).unwrap();
/// assert!((lp - (-0.5 - 2f64.ln())).abs() < 1e-12);
/// ```
pub fn freeze(family: FamilyRef, fixed: &[(usize, f64)]) -> Result<Frozen> {
    let specs = family.param_specs();
    let mut slots: Vec<Option<f64>> = vec![None; specs.len()];
    for &(i, v) in fixed {
        let spec = specs
            .get(i)
            .ok_or_else(|| domain(format!("{} has no parameter {i}", family.name())))?;
        if !spec.domain.contains(v) {
            return Err(domain(format!("cannot fix {} = {v}: outside {:?}", spec.name, spec.domain)));
        }
        slots[i] = Some(v);
    }
    let free = specs.iter().zip(&slots).filter(|(_, s)| s.is_none()).map(|(p, _)| p.clone()).collect();
    Ok(Frozen { name: family.name().to_string(), base: family, fixed: slots, specs: free })
}

impl Frozen {
    fn expand(&self, p: &[f64]) -> Vec<f64> {
        let mut free = p.iter();
        self.fixed.iter().map(|slot| slot.unwrap_or_else(|| *free.next().expect("free parameter"))).collect()
    }
}

impl Family for Frozen {
    fn name(&self) -> &str {
        &self.name
    }
    fn param_specs(&self) -> &[ParamSpec] {
        &self.specs
    }
    fn support(&self) -> (f64, f64) {
        self.base.support()
    }
    fn ln_pdf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        self.base.ln_pdf_unchecked(&self.expand(p), x)
    }
    fn cdf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        self.base.cdf_unchecked(&self.expand(p), x)
    }
    fn sf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        self.base.sf_unchecked(&self.expand(p), x)
    }
    fn ln_sf_unchecked(&self, p: &[f64], x: f64) -> f64 {
        self.base.ln_sf_unchecked(&self.expand(p), x)
    }
    fn quantile_unchecked(&self, p: &[f64], q: f64) -> f64 {
        self.base.quantile_unchecked(&self.expand(p), q)
    }
    fn isf_unchecked(&self, p: &[f64], s: f64) -> f64 {
        self.base.isf_unchecked(&self.expand(p), s)
    }
}
