//! Sampler behaviour against analytic laws, across modules.

use dslab::analysis::Analysis;
use dslab::model::{ModelTriple, ParamFamily};
use dslab::rng::par_streams;
use dslab::sampler::{mc_exit_probability, simulate_ensemble, simulate_path, EnsembleStats, SimConfig, Termination};

fn linear(beta1: f64) -> ModelTriple {
    ModelTriple::new(
        ParamFamily::new("power", &[("coef", 1.0), ("exponent", 1.0)]).unwrap().rate(),
        ParamFamily::new("constant", &[("value", beta1)]).unwrap().rate(),
        ParamFamily::new("exponential-survival", &[("theta", 1.0)]).unwrap().survival(),
    )
}

#[test]
fn linear_terminal_mean_is_gamma_mean() {
    let an = Analysis::new(linear(0.5));
    let cfg = SimConfig { horizon: 100.0, seed: 77, ..SimConfig::default() };
    let out = simulate_ensemble(&an, 1.0, &cfg, 10_000).unwrap();
    let st = EnsembleStats::summarize(&out, &cfg, 1.0);
    assert!(st.errors.is_empty());
    assert!((st.terminal_mean - 0.5).abs() < 3.0 * st.terminal_standard_error, "{} ± {}", st.terminal_mean, st.terminal_standard_error);
}

#[test]
fn exit_frequency_matches_overshoot_correction() {
    let an = Analysis::numeric(ModelTriple::from_exprs("x^2", "1+x^2", "exp(-x/2)").unwrap());
    let (a, x, b) = (0.5, 1.5, 3.0);
    let want = an.exit_probability_with_overshoot(x, a, b).unwrap();
    let cfg = SimConfig { seed: 3, ..SimConfig::default() };
    let mc = mc_exit_probability(&an, x, a, b, &cfg, 20_000).unwrap();
    assert_eq!(mc.censored, 0);
    assert!((mc.probability - want).abs() < 3.0 * mc.standard_error, "{mc:?} vs {want}");
}

#[test]
fn subcritical_hawkes_paths_die_out() {
    let an = Analysis::numeric(ModelTriple::from_exprs("x", "0.8*x", "exp(-x)").unwrap());
    let cfg = SimConfig { horizon: 200.0, ..SimConfig::default() };
    let paths = par_streams(500, 8, |rng| simulate_path(&an, 1.0, &cfg, rng).unwrap());
    for tr in paths {
        assert_eq!(tr.termination, Termination::HorizonReached);
        let last = tr.jump_times.last().copied().unwrap_or(0.0);
        // Long after the last jump, the path has decayed toward 0 along x e^{−t}.
        if last < 150.0 {
            assert!(tr.final_value < 1e-20, "{} after last jump at {last}", tr.final_value);
        }
    }
}

#[test]
fn supercritical_hawkes_maxima_keep_growing() {
    let an = Analysis::new(ModelTriple::new(
        ParamFamily::new("power", &[("coef", 1.0), ("exponent", 1.0)]).unwrap().rate(),
        ParamFamily::new("power", &[("coef", 1.2), ("exponent", 1.0)]).unwrap().rate(),
        ParamFamily::new("exponential-survival", &[("theta", 1.0)]).unwrap().survival(),
    ));
    // (max over the run, whether the path was still jumping at the end)
    let run = |n: u64, seed: u64| {
        let cfg = SimConfig { horizon: f64::MAX, max_jumps: n, ..SimConfig::default() };
        par_streams(200, seed, |rng| {
            let tr = simulate_path(&an, 20.0, &cfg, rng).unwrap();
            (tr.post_jump.iter().copied().fold(0.0, f64::max), tr.termination == Termination::ExplosionGuardTripped)
        })
    };
    // Same seed: the long run extends the short one jump for jump. A cluster
    // started from mass 20 dies out with probability e^{−24(1−1/1.2)} ≈ 2%,
    // and a path that has died out keeps its maximum.
    let (short, long) = (run(200, 5), run(2000, 5));
    let alive: Vec<_> = short.iter().zip(&long).filter(|(_, l)| l.1).collect();
    assert!(alive.len() >= 190, "{} of 200 still jumping", alive.len());
    let grew = alive.iter().filter(|(s, l)| l.0 > s.0).count();
    assert!(grew as f64 >= 0.99 * alive.len() as f64, "{grew}/{}", alive.len());
}
