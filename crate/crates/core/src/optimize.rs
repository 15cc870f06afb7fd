//! Derivative-free maximization: Nelder–Mead on unconstrained coordinates.

use serde::{Deserialize, Serialize};

use crate::distributions::Domain;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub f_rel_tol: f64,
    pub x_abs_tol: f64,
    /// Finite stand-in for a log-likelihood of −∞.
    pub penalty_value: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings { max_iterations: 500, f_rel_tol: 1e-8, x_abs_tol: 1e-8, penalty_value: -1e300 }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(domain("max_iterations must be at least 1"));
        }
        if !(self.f_rel_tol > 0.0 && self.x_abs_tol > 0.0) {
            return Err(domain("optimizer tolerances must be positive"));
        }
        Ok(())
    }
}

/// Map between a parameter's natural domain and the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log,
    Logit,
}

impl Transform {
    pub fn for_domain(d: Domain) -> Self {
        match d {
            Domain::Real => Transform::Identity,
            Domain::Positive => Transform::Log,
            Domain::UnitOpen => Transform::Logit,
        }
    }

    pub fn to_free(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Log => x.ln(),
            Transform::Logit => x.ln() - (-x).ln_1p(),
        }
    }

    pub fn from_free(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::Log => z.exp(),
            Transform::Logit => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Initial simplex edge along this coordinate.
    fn step(self, z: f64) -> f64 {
        match self {
            Transform::Identity => 0.1 * z.abs().max(1e-2),
            Transform::Log | Transform::Logit => 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// Maximizer, in natural coordinates.
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Maximizes `objective` from `init` (natural coordinates), searching over
/// `transforms[i].to_free(x[i])`.
///
/// Non-finite objective values are treated as the penalty value; a
/// non-finite value at `init` stops immediately without convergence.
///
/// ```
/// use locfit::optimize::{maximize, OptimizerSettings, Transform};
/// let best = maximize(|t| -(t[0] - 3.0).powi(2), &[0.0], &[Transform::Identity],
///                     &OptimizerSettings::default());
/// assert!(best.converged && (best.x[0] - 3.0).abs() < 1e-6);
/// ```
pub fn maximize(
    mut objective: impl FnMut(&[f64]) -> f64,
    init: &[f64],
    transforms: &[Transform],
    settings: &OptimizerSettings,
) -> Optimum {
    assert_eq!(init.len(), transforms.len(), "one transform per coordinate");
    let dim = init.len();
    let to_natural = |z: &[f64]| -> Vec<f64> { z.iter().zip(transforms).map(|(v, t)| t.from_free(*v)).collect() };
    let penalty = settings.penalty_value;
    let z0: Vec<f64> = init.iter().zip(transforms).map(|(v, t)| t.to_free(*v)).collect();
    let f0 = objective(init);
    let mut evaluations = 1usize;
    if !f0.is_finite() || z0.iter().any(|z| !z.is_finite()) {
        return Optimum { x: init.to_vec(), value: f0, converged: false, evaluations };
    }
    let mut eval = |z: &[f64]| -> f64 {
        evaluations += 1;
        let v = objective(&to_natural(z));
        if v.is_finite() {
            v.max(penalty)
        } else {
            penalty
        }
    };
    if dim == 0 {
        return Optimum { x: Vec::new(), value: f0, converged: true, evaluations };
    }

    // Dimension-adapted coefficients keep the simplex from stalling in the
    // five-parameter families.
    let n = dim as f64;
    let m = n.max(2.0);
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / m, 0.75 - 0.5 / m, 1.0 - 1.0 / m);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((z0.clone(), f0.max(penalty)));
    for i in 0..dim {
        let mut z = z0.clone();
        z[i] += transforms[i].step(z0[i]);
        let f = eval(&z);
        simplex.push((z, f));
    }

    let mut converged = false;
    for _ in 0..settings.max_iterations {
        // best first; stable sort keeps earlier vertices ahead on ties
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(z, _)| z.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let flat = (best - worst).abs() <= settings.f_rel_tol * (best.abs() + settings.f_rel_tol);
        if diameter < settings.x_abs_tol && flat {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (z, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(z) {
                *c += v / n;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let worst_z = simplex[dim].0.clone();
        let second = simplex[dim - 1].1;

        let zr = toward(alpha, &worst_z);
        let fr = eval(&zr);
        if fr > best {
            let ze = toward(alpha * beta, &worst_z);
            let fe = eval(&ze);
            simplex[dim] = if fe > fr { (ze, fe) } else { (zr, fr) };
            continue;
        }
        if fr > second {
            simplex[dim] = (zr, fr);
            continue;
        }
        if fr > worst {
            let zc = toward(alpha * gamma, &worst_z);
            let fc = eval(&zc);
            if fc >= fr {
                simplex[dim] = (zc, fc);
                continue;
            }
        } else {
            let zc = toward(-gamma, &worst_z);
            let fc = eval(&zc);
            if fc > worst {
                simplex[dim] = (zc, fc);
                continue;
            }
        }
        let z_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let z: Vec<f64> = z_best.iter().zip(&vertex.0).map(|(b, v)| b + delta * (v - b)).collect();
            let f = eval(&z);
            *vertex = (z, f);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (z, value) = simplex.swap_remove(0);
    Optimum { x: to_natural(&z), value, converged, evaluations }
}
