use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use dslab::analysis::{Analysis, RegimeReport};
use dslab::chains::{extract_records, simulate_embedded_chain, write_records_csv, Direction, EmbeddedSample};
use dslab::extreal::ExtReal;
use dslab::model::ModelTriple;
use dslab::rng::RngStream;
use dslab::sampler::{mc_exit_probability, mc_hitting_time, simulate_ensemble, write_trajectories_csv, EnsembleStats, SimConfig};
use dslab::validation::{run_suite_with, Status, ValidationOptions};

use crate::manifest::Run;
use crate::{AnalyzeArgs, ChainArgs, ExitArgs, HitArgs, InputError, ModelArg, SimArgs, SimulateArgs, ValidateArgs};

struct Loaded {
    analysis: Analysis,
    bytes: Vec<u8>,
}

fn load(arg: &ModelArg) -> Result<Loaded> {
    let path = &arg.model;
    let bytes = std::fs::read(path).map_err(|e| InputError(format!("cannot read model file {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| InputError(format!("model file {} is not UTF-8", path.display())))?;
    let model = ModelTriple::from_json(&text).map_err(|e| InputError(format!("invalid model file {}: {e}", path.display())))?;
    Ok(Loaded { analysis: Analysis::new(model), bytes })
}

fn start(command: &'static str, arg: &ModelArg, loaded: &Loaded, config: serde_json::Value) -> Result<Run> {
    let mut run = Run::new(command, &arg.out, config)?;
    run.model(&arg.model, &loaded.bytes);
    Ok(run)
}

fn sim_config(s: &SimArgs) -> Result<SimConfig> {
    let cfg = SimConfig { horizon: s.horizon, max_jumps: s.max_jumps, zero_policy: s.zero_policy.into(), seed: s.seed, ..SimConfig::default() };
    cfg.validate().map_err(|e| InputError(e.to_string()))?;
    if !(s.x0 > 0.0) || !s.x0.is_finite() {
        return Err(InputError(format!("x0 must be positive and finite, got {}", s.x0)).into());
    }
    Ok(cfg)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

/// Which downstream formulas have their preconditions met.
#[derive(Serialize)]
struct Preconditions {
    nonconstant_scale: bool,
    exit_probability: bool,
    mean_hitting_time: bool,
    mean_extinction_time: bool,
    embedded_chain: bool,
}

#[derive(Serialize)]
struct AnalyzeReport {
    model: String,
    regime: RegimeReport,
    preconditions: Preconditions,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<ExitCode> {
    if !(a.grid_min > 0.0 && a.grid_min < a.grid_max && a.grid_max.is_finite()) {
        return Err(InputError(format!("need 0 < grid-min < grid-max < ∞, got {} and {}", a.grid_min, a.grid_max)).into());
    }
    let loaded = load(&a.model)?;
    let an = &loaded.analysis;
    let config = json!({"grid_min": a.grid_min, "grid_max": a.grid_max, "grid_points": a.grid_points});
    let mut run = start("analyze", &a.model, &loaded, config)?;

    let regime = an.classify_regime().context("regime classification failed")?;
    let nonconstant_scale = !regime.gamma_at_inf.is_finite();
    let pi_inf = regime.pi_integrable_at_inf;
    let t0_finite = regime.boundary.t0_finite;
    let g0_finite = regime.gamma_at_0.is_finite();
    let pre = Preconditions {
        nonconstant_scale,
        exit_probability: nonconstant_scale && regime.s_at_inf.is_finite(),
        mean_hitting_time: pi_inf,
        mean_extinction_time: t0_finite && g0_finite && pi_inf,
        embedded_chain: !t0_finite && !g0_finite,
    };

    let mut w = csv_writer(run.create("tables.csv")?);
    w.write_record(["x", "Gamma", "s", "s1", "pi"])?;
    let n = a.grid_points as usize;
    let ratio = (a.grid_max / a.grid_min).ln();
    let cell = |v: dslab::Result<f64>| v.map(|v| ExtReal(v).to_string()).unwrap_or_default();
    for i in 0..n {
        let x = a.grid_min * (ratio * i as f64 / (n - 1) as f64).exp();
        let s1 = if pre.exit_probability { cell(an.scale_s1(x)) } else { String::new() };
        w.write_record([x.to_string(), cell(an.big_gamma(x)), cell(an.scale_s(x)), s1, ExtReal(an.speed_density(x)).to_string()])?;
    }
    w.flush()?;
    drop(w);

    let report = AnalyzeReport { model: a.model.model.display().to_string(), regime, preconditions: pre };
    run.write_json("report.json", &report)?;
    println!("verdict: {}", serde_json::to_value(report.regime.verdict)?.as_str().unwrap_or("?"));
    println!("boundary: {}", serde_json::to_value(report.regime.boundary.verdict)?.as_str().unwrap_or("?"));
    for (k, v) in serde_json::to_value(&report.preconditions)?.as_object().into_iter().flatten() {
        println!("precondition {k}: {v}");
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    n_paths: u64,
    seed: u64,
    x0: f64,
    horizon: f64,
    terminal_mean: f64,
    terminal_standard_error: f64,
    mean_jump_count: f64,
    terminations: &'a std::collections::BTreeMap<&'static str, u64>,
    errors: &'a [(u64, String)],
}

pub fn simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let cfg = sim_config(&a.sim)?;
    let loaded = load(&a.model)?;
    let config = json!({"paths": a.paths, "x0": a.sim.x0, "sim": cfg});
    let mut run = start("simulate", &a.model, &loaded, config)?;
    run.seed(cfg.seed);

    let outcomes = simulate_ensemble(&loaded.analysis, a.sim.x0, &cfg, a.paths)?;
    let ok = outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|t| (o.index, t)));
    let mut w = run.create("trajectories.csv")?;
    write_trajectories_csv(&mut w, ok.clone())?;
    w.flush()?;

    let mut w = csv_writer(run.create("inter_jump_times.csv")?);
    w.write_record(["path_id", "n", "T_n", "S_n", "Z_n"])?;
    for (id, tr) in ok {
        for (i, t) in tr.inter_jump_times().iter().enumerate() {
            w.write_record([id.to_string(), (i + 1).to_string(), t.to_string(), tr.jump_times[i].to_string(), tr.post_jump[i].to_string()])?;
        }
    }
    w.flush()?;
    drop(w);

    let stats = EnsembleStats::summarize(&outcomes, &cfg, a.sim.x0);
    let summary = EnsembleSummary {
        n_paths: stats.n_paths,
        seed: stats.seed,
        x0: stats.x0,
        horizon: stats.horizon,
        terminal_mean: stats.terminal_mean,
        terminal_standard_error: stats.terminal_standard_error,
        mean_jump_count: stats.mean_jump_count,
        terminations: &stats.terminations,
        errors: &stats.errors,
    };
    run.write_json("ensemble.json", &summary)?;
    println!("paths: {}  terminal mean: {} ± {}  mean jumps: {}", stats.n_paths, stats.terminal_mean, stats.terminal_standard_error, stats.mean_jump_count);
    if !stats.errors.is_empty() {
        eprintln!("warning: {} paths failed; see ensemble.json", stats.errors.len());
    }
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn chain(a: &ChainArgs, loaded: &Loaded) -> Result<Vec<EmbeddedSample>> {
    if !(a.x0 > 0.0) || !a.x0.is_finite() {
        return Err(InputError(format!("x0 must be positive and finite, got {}", a.x0)).into());
    }
    chain_from_seed(&loaded.analysis, a.x0, a.steps as usize, a.seed)
}

/// The chain for seed `s` is stream `(s, 0)`.
fn chain_from_seed(an: &Analysis, x0: f64, steps: usize, seed: u64) -> Result<Vec<EmbeddedSample>> {
    let mut rng = RngStream::new(seed, 0);
    Ok(simulate_embedded_chain(an, x0, steps, &mut rng, true)?)
}

fn chain_config(a: &ChainArgs) -> serde_json::Value {
    json!({"steps": a.steps, "x0": a.x0, "seed": a.seed})
}

pub fn embedded(a: &ChainArgs) -> Result<ExitCode> {
    let loaded = load(&a.model)?;
    let mut run = start("embedded", &a.model, &loaded, chain_config(a))?;
    run.seed(a.seed);
    let steps = chain(a, &loaded)?;
    let mut w = csv_writer(run.create("embedded.csv")?);
    w.write_record(["n", "S_n", "T_n", "Z_n", "direction"])?;
    w.write_record(["0", "0", "", &a.x0.to_string(), ""])?;
    let mut ups = 0;
    for (i, s) in steps.iter().enumerate() {
        let dir = match s.direction {
            Direction::Up => {
                ups += 1;
                "up"
            }
            Direction::Down => "down",
        };
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([(i + 1).to_string(), opt(s.jump_time), opt(s.inter_jump_time), s.z_next.to_string(), dir.to_string()])?;
    }
    w.flush()?;
    drop(w);
    println!("steps: {}  up moves: {ups}", steps.len());
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

pub fn records(a: &ChainArgs) -> Result<ExitCode> {
    let loaded = load(&a.model)?;
    let mut run = start("records", &a.model, &loaded, chain_config(a))?;
    run.seed(a.seed);
    let steps = chain(a, &loaded)?;
    let values: Vec<f64> = std::iter::once(a.x0).chain(steps.iter().map(|s| s.z_next)).collect();
    let times: Vec<f64> = std::iter::once(0.0).chain(steps.iter().map(|s| s.jump_time.unwrap_or(f64::NAN))).collect();
    let rc = extract_records(&values)?;
    let mut w = run.create("records.csv")?;
    write_records_csv(&mut w, &rc, Some(&times))?;
    w.flush()?;
    println!("steps: {}  records: {}", steps.len(), rc.record_values.len());
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

pub fn exitprob(a: &ExitArgs) -> Result<ExitCode> {
    let cfg = sim_config(&a.sim)?;
    let loaded = load(&a.model)?;
    let an = &loaded.analysis;
    let config = json!({"x": a.x, "a": a.a, "b": a.b, "mc_paths": a.mc_paths, "sim": cfg});
    let mut run = start("exitprob", &a.model, &loaded, config)?;
    let ratio = an.exit_probability(a.x, a.a, a.b)?;
    let overshoot = an.exit_probability_with_overshoot(a.x, a.a, a.b)?;
    let mc = match a.mc_paths {
        Some(n) => {
            run.seed(cfg.seed);
            Some(mc_exit_probability(an, a.x, a.a, a.b, &cfg, n)?)
        }
        None => None,
    };
    let out = json!({"scale_ratio": ratio, "with_overshoot": overshoot, "monte_carlo": mc});
    println!("{}", serde_json::to_string_pretty(&out)?);
    run.write_json("exitprob.json", &out)?;
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

pub fn hitmean(a: &HitArgs) -> Result<ExitCode> {
    let cfg = sim_config(&a.sim)?;
    let loaded = load(&a.model)?;
    let an = &loaded.analysis;
    let config = json!({"x": a.x, "a": a.a, "mc_paths": a.mc_paths, "sim": cfg});
    let mut run = start("hitmean", &a.model, &loaded, config)?;
    let value = if a.a == 0.0 { an.mean_extinction_time(a.x)? } else { an.mean_hitting_time(a.x, a.a)? };
    let mc = match a.mc_paths {
        Some(n) => {
            run.seed(cfg.seed);
            Some(mc_hitting_time(an, a.x, a.a, &cfg, n)?)
        }
        None => None,
    };
    let out = json!({"mean": value, "monte_carlo": mc});
    println!("{}", serde_json::to_string_pretty(&out)?);
    run.write_json("hitmean.json", &out)?;
    run.finish()?;
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    let opts = ValidationOptions { seed: a.seed, paths: a.paths };
    let outcomes = run_suite_with(a.suite, &opts, |o| println!("{o}"));
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count();
    let (pass, warn, fail) = (count(Status::Pass), count(Status::Warn), count(Status::Fail));
    println!("{pass} passed, {warn} warned, {fail} failed");
    if let Some(dir) = &a.out {
        let mut run = Run::new("validate", Path::new(dir), json!({"suite": a.suite, "paths": a.paths}))?;
        run.seed(a.seed);
        run.write_json("validation.json", &outcomes)?;
        run.finish()?;
    }
    Ok(if fail > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dslab::chains::up_probability;

    #[test]
    fn first_step_up_fraction_across_seeds() {
        let an = Analysis::new(ModelTriple::from_exprs("x", "0.5", "exp(-x)").unwrap());
        let n = 10_000;
        let ups = (0..n).filter(|&s| chain_from_seed(&an, 1.0, 1, s).unwrap()[0].direction == Direction::Up).count();
        let p = up_probability(&an, 1.0).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((ups as f64 / n as f64 - p).abs() < 3.0 * se, "{ups}/{n} vs {p}");
    }
}
