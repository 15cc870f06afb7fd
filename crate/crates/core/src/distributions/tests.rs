use std::f64::consts::LN_2;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::special::integrate;

fn fam(name: &str) -> FamilyRef {
    builtin(name).unwrap()
}

#[test]
fn log_pdf_examples() {
    let lp = fam("gamma").log_pdf(&[1.0, 2.0], 1.0).unwrap();
    assert!((lp - (-0.5 - LN_2)).abs() < 1e-12);
    // weibull(λ=1, k=1)
    assert_eq!(fam("weibull").log_pdf(&[1.0, 1.0], -1.0).unwrap(), f64::NEG_INFINITY);
    let oll = fam("ollgg").log_pdf(&[1.0, 2.0, 3.0, 1.0], 0.7).unwrap();
    let gg = fam("ggamma").log_pdf(&[1.0, 2.0, 3.0], 0.7).unwrap();
    assert!((oll - gg).abs() < 1e-14);
}

#[test]
fn cdf_examples() {
    assert_eq!(fam("weibull").cdf(&[1.0, 1.0], 0.0).unwrap(), 0.0);
    assert!((fam("lnormal").cdf(&[0.0, 1.0], 1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((fam("gamma").cdf(&[1.0, 1.0], LN_2).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn quantile_examples() {
    assert!((fam("lnormal").quantile(&[0.0, 1.0], 0.5).unwrap() - 1.0).abs() < 1e-14);
    assert!((fam("gamma").quantile(&[1.0, 1.0], 0.5).unwrap() - LN_2).abs() < 1e-12);
    assert!(fam("gamma").quantile(&[1.0, 1.0], 0.0).is_err());
    assert!(fam("gamma").quantile(&[1.0, 1.0], 1.0).is_err());
}

#[test]
fn domain_errors() {
    assert!(fam("gamma").log_pdf(&[-1.0, 1.0], 1.0).is_err());
    assert!(fam("gamma").log_pdf(&[1.0], 1.0).is_err());
    assert!(fam("normal").cdf(&[0.0, f64::NAN], 1.0).is_err());
    // α is open on both ends
    assert!(fam("kwcwg").log_pdf(&[1.0, 1.0, 1.0, 1.0, 1.0], 1.0).is_err());
    assert!(fam("kwcwg").log_pdf(&[0.0, 1.0, 1.0, 1.0, 1.0], 1.0).is_err());
    assert!(fam("kwcwg").log_pdf(&[0.5, 1.0, 1.0, 1.0, 1.0], 1.0).is_ok());
    assert!(builtin("pareto").is_none());
}

#[test]
fn registry_names_round_trip() {
    for name in BUILTIN_NAMES {
        assert_eq!(fam(name).name(), name);
    }
}

#[test]
fn default_grid_shape_and_domain() {
    for f in builtins() {
        for scale in [SampleScale::unit(), SampleScale::of(&[100.2, 100.9, 101.4, 100.5])] {
            let grid = f.default_grid(&scale);
            assert_eq!(grid.len(), 3usize.pow(f.param_count() as u32));
            for point in &grid {
                assert_eq!(point.len(), f.param_count());
                f.check(point).unwrap();
            }
        }
    }
}

#[test]
fn roundtrip_on_default_grids() {
    let levels = [0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999];
    for f in builtins() {
        for point in f.default_grid(&SampleScale::unit()) {
            for &q in &levels {
                let x = f.quantile(&point, q).unwrap();
                let back = f.cdf(&point, x).unwrap();
                assert!((back - q).abs() < 1e-9, "{} {point} q={q} x={x} back={back}", f.name());
            }
        }
    }
}

/// Integral of the density split at quantiles so narrow peaks are not missed.
fn total_mass(f: &dyn Family, p: &[f64]) -> f64 {
    let (lower, _) = f.support();
    let start = if lower.is_finite() { lower } else { f.quantile_unchecked(p, 1e-9) };
    let mut knots = vec![start];
    for q in [1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1.0 - 1e-6, 1.0 - 1e-9] {
        let x = f.quantile_unchecked(p, q);
        if x > *knots.last().unwrap() {
            knots.push(x);
        }
    }
    let pdf = |x: f64| f.ln_pdf_unchecked(p, x).exp();
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate(|x| { let v = pdf(x); if v.is_finite() { v } else { 0.0 } }, w[0], w[1], 1e-10);
    }
    if !lower.is_finite() {
        total += 1e-9;
    }
    total + 1e-9
}

#[test]
fn densities_integrate_to_one_on_unit_grids() {
    for f in builtins() {
        for point in f.default_grid(&SampleScale::unit()) {
            let mass = total_mass(f.as_ref(), &point);
            assert!((mass - 1.0).abs() < 1e-4, "{} {point}: {mass}", f.name());
        }
    }
}

#[test]
fn cdf_derivative_matches_density() {
    for f in builtins() {
        let grid = f.default_grid(&SampleScale::unit());
        for point in grid.iter().step_by(7) {
            for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let x = f.quantile_unchecked(point, q);
                let h = if x != 0.0 { 1e-6 * x.abs() } else { 1e-9 };
                let fd = (f.cdf_unchecked(point, x + h) - f.cdf_unchecked(point, x - h)) / (2.0 * h);
                let pdf = f.ln_pdf_unchecked(point, x).exp();
                if pdf > 1e-6 {
                    assert!(((fd - pdf) / pdf).abs() < 1e-4, "{} {point} x={x}: {fd} vs {pdf}", f.name());
                }
            }
        }
    }
}

fn support_points(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(|i| 0.05 * i as f64)
}

#[test]
fn sub_model_reductions() {
    let (oll, gg, ew, wb) = (fam("ollgg"), fam("ggamma"), fam("eweibull"), fam("weibull"));
    for x in support_points(100) {
        let a = oll.log_pdf(&[1.3, 2.0, 0.7, 1.0], x).unwrap();
        let b = gg.log_pdf(&[1.3, 2.0, 0.7], x).unwrap();
        assert!((a - b).abs() < 1e-10);

        let a = ew.log_pdf(&[1.7, 1.0, 2.2], x).unwrap();
        let b = wb.log_pdf(&[2.2, 1.7], x).unwrap();
        assert!((a - b).abs() < 1e-10);

        let a = gg.log_pdf(&[2.2, 1.7, 1.0], x).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
    let kw = fam("kwcwg");
    for x in support_points(100) {
        let a = kw.log_pdf(&[1.0 - 1e-8, 1.5, 0.5, 1.0, 1.0], x).unwrap().exp();
        let b = wb.log_pdf(&[2.0, 1.5], x).unwrap().exp();
        assert!((a - b).abs() < 1e-4);
    }
}

#[test]
fn draw_is_deterministic_and_in_support() {
    for f in builtins() {
        let p = &f.default_grid(&SampleScale::unit())[0];
        let one = f.draw(p, 1, 9).unwrap();
        assert!(f.ln_pdf_unchecked(p, one[0]) > f64::NEG_INFINITY);
        assert_eq!(f.draw(p, 20, 3).unwrap(), f.draw(p, 20, 3).unwrap());
        assert_ne!(f.draw(p, 20, 3).unwrap(), f.draw(p, 20, 4).unwrap());
    }
}

#[test]
fn draw_ecdf_within_dkw_band() {
    let n = 10_000;
    let f = fam("weibull");
    let mut xs = f.draw(&[1.0, 1.0], n, 2024).unwrap();
    xs.sort_by(f64::total_cmp);
    let sup = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = f.cdf_unchecked(&[1.0, 1.0], x);
            (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
        })
        .fold(0.0, f64::max);
    let band = (-(0.005f64).ln() / (2.0 * n as f64)).sqrt();
    assert!((band - 0.0163).abs() < 1e-4);
    assert!(sup < band, "sup={sup}");
}

#[test]
fn compose_with_uniform_is_identity() {
    let inner = fam("gamma");
    let c = compose_cdf(Arc::new(Uniform01), inner.clone()).unwrap();
    assert_eq!(c.param_count(), 2);
    for x in support_points(60) {
        let a = c.cdf(&[2.0, 1.5], x).unwrap();
        let b = inner.cdf(&[2.0, 1.5], x).unwrap();
        assert!((a - b).abs() < 1e-15);
        let a = c.log_pdf(&[2.0, 1.5], x).unwrap();
        let b = inner.log_pdf(&[2.0, 1.5], x).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn compose_rejects_outer_off_unit_interval() {
    let err = compose_cdf(fam("gamma"), fam("weibull")).unwrap_err();
    assert!(matches!(err, crate::Error::Contract(_)));
}

#[test]
fn gamma_beta_composition_is_a_cdf() {
    let c = compose_cdf(Arc::new(Beta::new()), fam("gamma")).unwrap();
    let p = [10.0, 0.25, 0.2, 0.1];
    assert_eq!(c.cdf(&p, 0.0).unwrap(), 0.0);
    assert!((c.cdf(&p, 1e4).unwrap() - 1.0).abs() < 1e-12);
    let mut prev = 0.0;
    for i in 0..1000 {
        let v = c.cdf(&p, i as f64 * 0.01).unwrap();
        assert!(v >= prev && (0.0..=1.0).contains(&v));
        prev = v;
    }
    let x = c.quantile(&p, 0.3).unwrap();
    assert!((c.cdf(&p, x).unwrap() - 0.3).abs() < 1e-9);
}

#[test]
fn oll_over_ggamma_reproduces_ollgg() {
    let c = compose_cdf(Arc::new(OddLogLogistic::new()), fam("ggamma")).unwrap();
    let oll = fam("ollgg");
    for x in support_points(40) {
        let a = c.log_pdf(&[1.3, 2.0, 0.7, 2.5], x).unwrap();
        let b = oll.log_pdf(&[1.3, 2.0, 0.7, 2.5], x).unwrap();
        assert!((a - b).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn kumaraswamy_over_weibull_is_valid() {
    let c = compose_cdf(Arc::new(Kumaraswamy::new()), fam("weibull")).unwrap();
    let p = [1.0, 1.5, 2.0, 0.7];
    let mass = total_mass(&c, &p);
    assert!((mass - 1.0).abs() < 1e-6);
    for q in [0.01, 0.2, 0.5, 0.8, 0.99] {
        let x = c.quantile(&p, q).unwrap();
        assert!((c.cdf(&p, x).unwrap() - q).abs() < 1e-9);
    }
}

#[test]
fn truncation_basics() {
    let g = fam("gamma");
    let p = [2.0, 1.5];
    let t0 = truncate_at(g.clone(), &p, 0.0).unwrap();
    for y in support_points(50) {
        assert!((t0.log_pdf(&p, y).unwrap() - g.log_pdf(&p, y).unwrap()).abs() < 1e-14);
    }
    let t = truncate_at(g.clone(), &p, 2.0).unwrap();
    assert_eq!(t.log_pdf(&p, -0.1).unwrap(), f64::NEG_INFINITY);
    assert!((total_mass(&t, &p) - 1.0).abs() < 1e-6);

    let ys = [0.3, 1.1, 2.7, 0.05];
    let ll_t: f64 = ys.iter().map(|y| t.log_pdf(&p, *y).unwrap()).sum();
    let ll_b: f64 = ys.iter().map(|y| g.log_pdf(&p, y + 2.0).unwrap()).sum();
    let offset = -(ys.len() as f64) * (1.0 - g.cdf(&p, 2.0).unwrap()).ln();
    assert!((ll_t - ll_b - offset).abs() < 1e-12);
}

#[test]
fn truncation_without_mass_is_degenerate() {
    let err = truncate_at(fam("weibull"), &[1.0, 2.0], 1e200).unwrap_err();
    assert!(matches!(err, crate::Error::Degenerate(_)));
}

#[test]
fn truncated_normal_matches_manual_normalisation() {
    let tn = fam("tnormal");
    let n = fam("normal");
    let p = [0.3, 1.2];
    let mass = 1.0 - n.cdf(&p, 0.0).unwrap();
    for x in support_points(30) {
        let a = tn.log_pdf(&p, x).unwrap();
        let b = n.log_pdf(&p, x).unwrap() - mass.ln();
        assert!((a - b).abs() < 1e-13);
    }
    assert_eq!(tn.log_pdf(&p, -0.5).unwrap(), f64::NEG_INFINITY);
    // far-left parent: almost no mass above zero, still a proper density
    let far = [-30.0, 1.0];
    assert!(tn.log_pdf(&far, 0.01).unwrap().is_finite());
    let x = tn.quantile(&far, 0.5).unwrap();
    assert!((tn.cdf(&far, x).unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn shift_examples() {
    let g = fam("gamma");
    let p = [1.0, 2.0];
    let s0 = shift_by(g.clone(), 0.0);
    let s = shift_by(g.clone(), 100.0);
    assert_eq!(s0.log_pdf(&p, 3.0).unwrap(), g.log_pdf(&p, 3.0).unwrap());
    assert_eq!(s.log_pdf(&p, 101.0).unwrap(), g.log_pdf(&p, 1.0).unwrap());
    assert_eq!(s.log_pdf(&p, 99.0).unwrap(), f64::NEG_INFINITY);
    for q in [0.1, 0.5, 0.9] {
        let a = s.quantile(&p, q).unwrap();
        let b = g.quantile(&p, q).unwrap();
        assert!((a - (100.0 + b)).abs() < 1e-9);
    }
    assert_eq!(s.support().0, 100.0);
}

#[test]
fn frozen_parameters() {
    let e = freeze(fam("gamma"), &[(0, 1.0)]).unwrap();
    assert_eq!(e.param_specs()[0].name, "theta");
    assert!((e.cdf(&[1.0], LN_2).unwrap() - 0.5).abs() < 1e-14);
    assert!(freeze(fam("gamma"), &[(0, -1.0)]).is_err());
    assert!(freeze(fam("gamma"), &[(5, 1.0)]).is_err());
}

fn pick(i: usize) -> (FamilyRef, Vec<f64>) {
    let f = builtins().swap_remove(i % 9);
    let grid = f.default_grid(&SampleScale::unit());
    let p = grid[(i * 7) % grid.len()].0.clone();
    (f, p)
}

fn unit_outer(i: usize) -> (FamilyRef, Vec<f64>) {
    match i % 4 {
        0 => (Arc::new(Uniform01), vec![]),
        1 => (Arc::new(Beta::new()), vec![0.7, 2.5]),
        2 => (Arc::new(Kumaraswamy::new()), vec![2.0, 0.6]),
        _ => (Arc::new(OddLogLogistic::new()), vec![1.8]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone(i in 0usize..9, j in 0usize..1000, step in 0.001f64..0.05) {
        let (f, p) = pick(i + 9 * j);
        let start = f.quantile_unchecked(&p, 1e-4);
        let mut prev = 0.0;
        for k in 0..1000 {
            let v = f.cdf_unchecked(&p, start + step * k as f64);
            prop_assert!(v >= prev - 1e-15);
            prop_assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn compositions_satisfy_cdf_axioms(i in 0usize..9, o in 0usize..4, j in 0usize..100) {
        let (inner, pi) = pick(i + 9 * j);
        let (outer, po) = unit_outer(o);
        let c = compose_cdf(outer, inner).unwrap();
        let p: Vec<f64> = pi.iter().chain(&po).copied().collect();
        let lo = c.cdf_unchecked(&p, -1e300);
        let hi = c.cdf_unchecked(&p, 1e300);
        prop_assert!(lo.abs() < 1e-12);
        prop_assert!((hi - 1.0).abs() < 1e-12);
        let a = c.quantile_unchecked(&p, 0.01);
        let b = c.quantile_unchecked(&p, 0.99);
        let mut prev = 0.0;
        for k in 0..=200 {
            let v = c.cdf_unchecked(&p, a + (b - a) * k as f64 / 200.0);
            prop_assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
