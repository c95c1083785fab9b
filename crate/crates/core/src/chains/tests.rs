use approx::assert_relative_eq;

use super::*;
use crate::model::ModelTriple;
use crate::stats::{dkw_epsilon, ks_one_sample, mean_se};

/// α = x, β = 1, k = e^{−x}: Γ = ln y, G(m) = e^m − 1.
fn linear() -> Analysis {
    Analysis::new(ModelTriple::from_exprs("x", "1", "exp(-x)").unwrap())
}

fn analytic_s(x: f64, y: f64) -> f64 {
    if y < x {
        1.0 - y / x + (1.0 - (-y).exp()) / x
    } else {
        (-y).exp() * (x.exp() - 1.0) / x
    }
}

#[test]
fn survival_matches_analytic() {
    let an = linear();
    for &(x, y) in &[(1.0, 2.0), (1.0, 0.5), (3.0, 3.0), (0.2, 0.01), (5.0, 9.0)] {
        assert_relative_eq!(embedded_survival(&an, x, y).unwrap(), analytic_s(x, y), max_relative = 1e-10);
    }
    assert_relative_eq!(up_probability(&an, 1.0).unwrap(), 1.0 - (-1.0f64).exp(), max_relative = 1e-10);
    assert_eq!(embedded_survival(&an, 1.0, 0.0).unwrap(), 1.0);
    assert!(embedded_survival(&an, 1.0, 1e-12).unwrap() > 1.0 - 1e-9);
    assert_eq!(embedded_survival(&an, 1.0, f64::INFINITY).unwrap(), 0.0);
}

#[test]
fn domain_preconditions() {
    // α = 1, β = 1/x: Γ = ln x, but the flow reaches 0.
    let release = Analysis::new(ModelTriple::from_exprs("1", "1/x", "exp(-x)").unwrap());
    assert!(matches!(embedded_survival(&release, 1.0, 2.0), Err(Error::Precondition(m)) if m.contains("t₀")));
    let hawkes = Analysis::new(ModelTriple::from_exprs("x", "0.8*x", "exp(-x)").unwrap());
    assert!(matches!(embedded_survival(&hawkes, 1.0, 2.0), Err(Error::Precondition(m)) if m.contains("Γ(0)")));
    assert!(record_transition(&linear(), 4, 1.0, 2.0).is_err());
}

#[test]
fn density_matches_analytic() {
    let an = linear();
    let x: f64 = 1.5;
    for y in [0.01f64, 0.7, 1.49, 1.51, 4.0] {
        let want = if y < x { (1.0 - (-y).exp()) / x } else { (-y).exp() * (x.exp() - 1.0) / x };
        assert_relative_eq!(transition_density(&an, x, y).unwrap(), want, max_relative = 1e-7);
    }
}

#[test]
fn step_law_within_dkw_band() {
    let an = linear();
    let mut rng = RngStream::new(21, 0);
    let x = 1.0;
    let steps: Vec<EmbeddedSample> = (0..5000).map(|_| sample_embedded_step(&an, x, &mut rng, false).unwrap()).collect();
    for s in &steps {
        assert_eq!(s.direction == Direction::Up, s.z_next > x);
        if s.direction == Direction::Down {
            assert!(s.z_next < x);
        }
    }
    let zs: Vec<f64> = steps.iter().map(|s| s.z_next).collect();
    let d = ks_one_sample(&zs, |y| 1.0 - analytic_s(x, y));
    assert!(d < dkw_epsilon(zs.len(), 0.01), "{d}");
    let ups: Vec<f64> = steps.iter().map(|s| (s.direction == Direction::Up) as u8 as f64).collect();
    let (p, se) = mean_se(&ups);
    assert!((p - (1.0 - (-1.0f64).exp())).abs() < 4.0 * se);
}

#[test]
fn chain_with_times() {
    let an = linear();
    let mut rng = RngStream::new(1, 0);
    assert!(simulate_embedded_chain(&an, 1.0, 0, &mut rng, true).unwrap().is_empty());
    let chain = simulate_embedded_chain(&an, 1.0, 200, &mut rng, true).unwrap();
    let times: Vec<f64> = chain.iter().map(|s| s.jump_time.unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert!(chain.iter().all(|s| s.inter_jump_time.unwrap() > 0.0 && s.z_next > 0.0));
    let plain = simulate_embedded_chain(&an, 1.0, 10, &mut RngStream::new(1, 0), false).unwrap();
    assert!(plain.iter().all(|s| s.jump_time.is_none()));
}

#[test]
fn record_transition_properties() {
    let an = linear();
    let (x, y) = (1.0, 2.0);
    assert_eq!(record_transition(&an, 1, x, y).unwrap(), embedded_survival(&an, x, y).unwrap());
    // k = 2 against an independent quadrature with the analytic density.
    let f = |x1: f64| (1.0 - (-x1).exp()) / x * (-y).exp() * (x1.exp() - 1.0) / x1;
    let want = crate::calculus::integrate(&f, 0.0, x, 1e-12).unwrap().value;
    assert_relative_eq!(record_transition(&an, 2, x, y).unwrap(), want, max_relative = 1e-6);
    let mut prev = f64::INFINITY;
    for &yy in &[1.0, 1.5, 3.0, 10.0] {
        let v = record_transition(&an, 2, x, yy).unwrap();
        assert!(v <= prev);
        prev = v;
    }
    assert!(record_transition(&an, 1, x, 60.0).unwrap() < 1e-20);
    let total: f64 = (1..=3).map(|k| record_transition(&an, k, x, x).unwrap()).sum();
    assert!(total <= 1.0 && total > 0.8, "{total}");
}
