//! Independent constructions of the same process agree.

use dslab::analysis::Analysis;
use dslab::duality::{dual_triple, pathwise_duality_check, GcAnalysis};
use dslab::model::{ModelTriple, ParamFamily};
use dslab::oracles::{shotnoise_simulate_value, ShotNoiseParams};
use dslab::rng::par_streams;
use dslab::sampler::{simulate_path, SimConfig};
use dslab::stats::{ks_critical, ks_two_sample, mean_se};

#[test]
fn shot_noise_direct_vs_generic_sampler() {
    let p = ShotNoiseParams::new(0.7, 1.3, 2.0).unwrap();
    let an = Analysis::new(p.triple().unwrap());
    let (x0, horizon) = (0.4, 3.0);
    let cfg = SimConfig { horizon, ..SimConfig::default() };
    let generic = par_streams(5000, 1, |rng| simulate_path(&an, x0, &cfg, rng).unwrap().final_value);
    let direct = par_streams(5000, 2, |rng| shotnoise_simulate_value(&p, x0, horizon, rng));
    assert!(ks_two_sample(&generic, &direct) < ks_critical(0.01, 5000, 5000));
}

#[test]
fn duality_on_a_nonlinear_power_model() {
    // α = x^{3/2}, β = 2x^{1/2}: the dual is again a power-law pair.
    let m = ModelTriple::new(
        ParamFamily::new("power", &[("coef", 1.0), ("exponent", 1.5)]).unwrap().rate(),
        ParamFamily::new("power", &[("coef", 2.0), ("exponent", 0.5)]).unwrap().rate(),
        ParamFamily::new("pareto-survival", &[("c", 3.0)]).unwrap().survival(),
    );
    let cfg = SimConfig { horizon: 20.0, ..SimConfig::default() };
    for seed in 0..20 {
        let r = pathwise_duality_check(&m, 2.0, &cfg, seed).unwrap();
        assert!(r.jump_times_agree, "{r:?}");
        assert!(r.max_relative_discrepancy < 1e-11, "{r:?}");
    }
}

#[test]
fn dual_expression_model_matches_jump_count_law() {
    // Numeric tables on both sides: the mean number of jumps by time 5 agrees.
    let m = ModelTriple::from_exprs("x + x^2", "1 + x", "exp(-x)").unwrap();
    let an = Analysis::numeric(m.clone());
    let gc = GcAnalysis::new(dual_triple(&m));
    let cfg = SimConfig { horizon: 5.0, zero_policy: dslab::sampler::ZeroPolicy::Absorb, ..SimConfig::default() };
    let ds: Vec<f64> = par_streams(4000, 3, |rng| simulate_path(&an, 1.0, &cfg, rng).unwrap().jump_count() as f64);
    let dual: Vec<f64> = par_streams(4000, 4, |rng| gc.simulate(1.0, &cfg, rng).unwrap().jump_count() as f64);
    let ((m1, s1), (m2, s2)) = (mean_se(&ds), mean_se(&dual));
    assert!((m1 - m2).abs() < 3.5 * (s1 * s1 + s2 * s2).sqrt(), "{m1} ± {s1} vs {m2} ± {s2}");
}
