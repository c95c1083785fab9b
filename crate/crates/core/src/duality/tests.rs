use approx::assert_relative_eq;

use super::*;
use crate::model::{log_grid, ParamFamily};
use crate::stats::{dkw_epsilon, ks_two_sample};

fn fam(name: &str, p: &[(&str, f64)]) -> ParamFamily {
    ParamFamily::new(name, p).unwrap()
}

fn linear() -> ModelTriple {
    ModelTriple::new(
        fam("power", &[("coef", 1.0), ("exponent", 1.0)]).rate(),
        fam("constant", &[("value", 0.5)]).rate(),
        fam("exponential-survival", &[("theta", 1.0)]).survival(),
    )
}

#[test]
fn dual_of_linear_model() {
    let d = dual_triple(&linear());
    for &x in &[0.1, 1.0, 7.0] {
        assert_relative_eq!(d.alpha_tilde.evaluate(x), x, max_relative = 1e-15);
        assert_eq!(d.beta_tilde.evaluate(x), 0.5);
        assert_relative_eq!(d.h_tilde.evaluate(x), (-1.0 / x).exp(), max_relative = 1e-15);
    }
}

#[test]
fn gamma_tilde_is_reflected_gamma() {
    let m = ModelTriple::from_exprs("x^2", "1+x^2", "exp(-x/2)").unwrap();
    let an = Analysis::new(m.clone());
    let gc = GcAnalysis::new(dual_triple(&m));
    for x in log_grid(1e-3, 1e3, 25) {
        let (a, b) = (gc.big_gamma(x).unwrap(), -an.big_gamma(1.0 / x).unwrap());
        assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{x}: {a} vs {b}");
    }
}

#[test]
fn inverse_map_is_an_involution() {
    let m = ModelTriple::from_exprs("1+x", "x^0.5", "(1+x)^(-3)").unwrap();
    let back = dual_triple(&m).inverse_map();
    for x in log_grid(1e-2, 1e2, 15) {
        assert_relative_eq!(back.alpha.evaluate(x), m.alpha.evaluate(x), max_relative = 1e-13);
        assert_relative_eq!(back.beta.evaluate(x), m.beta.evaluate(x), max_relative = 1e-13);
        assert_relative_eq!(back.k.evaluate(x), m.k.evaluate(x), max_relative = 1e-13);
    }
}

#[test]
fn pathwise_agreement_on_linear_model() {
    let cfg = SimConfig { horizon: 50.0, ..SimConfig::default() };
    let an = Analysis::new(linear());
    let gc = GcAnalysis::new(dual_triple(&linear()));
    for seed in 0..10 {
        let r = pathwise_duality_check_with(&an, &gc, 1.0, &cfg, seed).unwrap();
        assert!(!r.truncated);
        assert!(r.jumps > 0);
        assert!(r.jump_times_agree, "{r:?}");
        assert!(r.max_discrepancy < 1e-9, "{r:?}");
    }
}

#[test]
fn pure_flow_duality() {
    let m = ModelTriple::from_exprs("x", "0", "exp(-x)").unwrap();
    let cfg = SimConfig { horizon: 5.0, ..SimConfig::default() };
    let r = pathwise_duality_check(&m, 1.0, &cfg, 3).unwrap();
    assert_eq!((r.jumps, r.dual_jumps), (0, 0));
    assert!(r.max_relative_discrepancy < 1e-10, "{r:?}");
}

#[test]
fn truncation_when_flow_reaches_zero() {
    let m = ModelTriple::from_exprs("1", "0.1", "exp(-x)").unwrap();
    let cfg = SimConfig { horizon: 100.0, ..SimConfig::default() };
    let r = pathwise_duality_check(&m, 0.5, &cfg, 0).unwrap();
    assert!(r.truncated && r.checked_until < 100.0);
}

#[test]
fn first_jump_time_laws_agree() {
    let m = linear();
    let an = Analysis::new(m.clone());
    let gc = GcAnalysis::new(dual_triple(&m));
    let mut r1 = RngStream::new(1, 0);
    let mut r2 = RngStream::new(2, 0);
    let n = 4000;
    let ds: Vec<f64> = (0..n)
        .map(|_| match crate::sampler::sample_jump_time(&an, 2.0, &mut r1).unwrap() {
            crate::sampler::JumpTime::Jump { t, .. } => t,
            crate::sampler::JumpTime::FlowHitsZero { t0 } => t0,
        })
        .collect();
    let dual: Vec<f64> = (0..n)
        .map(|_| match gc.jump_time_from_uniform(0.5, r2.uniform()).unwrap() {
            GcJump::Jump { t, .. } => t,
            GcJump::Escapes { t_inf } => t_inf,
        })
        .collect();
    assert!(ks_two_sample(&ds, &dual) < 2.0 * dkw_epsilon(n, 0.01));
}

#[test]
fn closed_forms_agree_with_tables() {
    let m = ModelTriple::new(
        fam("power", &[("coef", 1.5), ("exponent", 0.5)]).rate(),
        fam("power", &[("coef", 0.7), ("exponent", 2.0)]).rate(),
        fam("exponential-survival", &[("theta", 1.0)]).survival(),
    );
    let d = dual_triple(&m);
    assert!(d.closed.growth.is_some() && d.closed.gamma.is_some());
    let (closed, tables) = (GcAnalysis::new(d.clone()), GcAnalysis::numeric(d));
    for x in log_grid(1e-2, 1e2, 9) {
        assert_relative_eq!(closed.big_gamma(x).unwrap(), tables.big_gamma(x).unwrap(), max_relative = 1e-9, epsilon = 1e-12);
        for t in [0.01, 0.3, 2.0] {
            assert_relative_eq!(closed.flow(x, t).unwrap(), tables.flow(x, t).unwrap(), max_relative = 1e-9);
        }
    }
    assert_relative_eq!(closed.gamma_at_infinity().unwrap(), tables.gamma_at_infinity().unwrap(), max_relative = 1e-9);
}

#[test]
fn table_route_agrees_relatively() {
    let cfg = SimConfig { horizon: 50.0, ..SimConfig::default() };
    let an = Analysis::new(linear());
    let gc = GcAnalysis::numeric(dual_triple(&linear()));
    for seed in 0..10 {
        let r = pathwise_duality_check_with(&an, &gc, 1.0, &cfg, seed).unwrap();
        assert!(r.jump_times_agree && r.max_relative_discrepancy < 1e-9, "{r:?}");
    }
}
