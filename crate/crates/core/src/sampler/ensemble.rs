//! Parallel ensembles and Monte Carlo estimators built on them.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{simulate_path, simulate_path_until, SimConfig, StopRule, Termination, Trajectory};
use crate::analysis::Analysis;
use crate::error::{invalid, Result};
use crate::rng::par_streams;
use crate::stats::mean_se;

#[derive(Debug, Clone)]
pub struct PathOutcome {
    pub index: u64,
    pub result: std::result::Result<Trajectory, String>,
}

/// Simulate `n_paths` independent paths; path `i` uses stream `(config.seed, i)`.
pub fn simulate_ensemble(an: &Analysis, x0: f64, config: &SimConfig, n_paths: u64) -> Result<Vec<PathOutcome>> {
    config.validate()?;
    if n_paths < 1 {
        return invalid("n_paths must be at least 1");
    }
    Ok(par_streams(n_paths, config.seed, |rng| PathOutcome {
        index: rng.path_index(),
        result: simulate_path(an, x0, config, rng).map_err(|e| e.to_string()),
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    pub n_paths: u64,
    pub seed: u64,
    pub x0: f64,
    pub horizon: f64,
    pub terminal_values: Vec<f64>,
    pub jump_counts: Vec<usize>,
    pub terminal_mean: f64,
    pub terminal_standard_error: f64,
    pub mean_jump_count: f64,
    pub terminations: BTreeMap<&'static str, u64>,
    /// Per-path failures, keyed by path index.
    pub errors: Vec<(u64, String)>,
}

impl EnsembleStats {
    pub fn summarize(outcomes: &[PathOutcome], config: &SimConfig, x0: f64) -> Self {
        let mut terminal_values = Vec::new();
        let mut jump_counts = Vec::new();
        let mut terminations = BTreeMap::new();
        let mut errors = Vec::new();
        for o in outcomes {
            match &o.result {
                Ok(tr) => {
                    terminal_values.push(tr.final_value);
                    jump_counts.push(tr.jump_count());
                    *terminations.entry(tr.termination.as_str()).or_insert(0) += 1;
                }
                Err(e) => errors.push((o.index, e.clone())),
            }
        }
        let horizon_values: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().ok())
            .filter(|t| t.termination == Termination::HorizonReached)
            .map(|t| t.final_value)
            .collect();
        let (terminal_mean, terminal_standard_error) = mean_se(&horizon_values);
        let mean_jump_count = jump_counts.iter().sum::<usize>() as f64 / jump_counts.len().max(1) as f64;
        Self {
            n_paths: outcomes.len() as u64,
            seed: config.seed,
            x0,
            horizon: config.horizon,
            terminal_values,
            jump_counts,
            terminal_mean,
            terminal_standard_error,
            mean_jump_count,
            terminations,
            errors,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingStats {
    pub n_paths: u64,
    /// Mean over paths that hit before the horizon.
    pub mean: f64,
    pub standard_error: f64,
    pub hits: u64,
    /// Paths that had not hit by the horizon (or stopped otherwise).
    pub censored: u64,
}

/// Monte Carlo estimate of `E τ_{x,a}`, the first time the path is `≤ a`.
pub fn mc_hitting_time(an: &Analysis, x: f64, a: f64, config: &SimConfig, n_paths: u64) -> Result<HittingStats> {
    config.validate()?;
    if !(a >= 0.0) || !(a <= x) {
        return invalid(format!("need 0 ≤ a ≤ x, got a = {a}, x = {x}"));
    }
    if n_paths < 1 {
        return invalid("n_paths must be at least 1");
    }
    if a == x {
        return Ok(HittingStats { n_paths, mean: 0.0, standard_error: 0.0, hits: n_paths, censored: 0 });
    }
    let stop = StopRule { below: Some(a), above: None };
    let runs = par_streams(n_paths, config.seed, |rng| simulate_path_until(an, x, config, rng, stop));
    let mut times = Vec::with_capacity(runs.len());
    let mut censored = 0;
    for r in runs {
        let tr = r?;
        if tr.termination == Termination::HitLower {
            times.push(tr.end_time);
        } else {
            censored += 1;
        }
    }
    let (mean, standard_error) = mean_se(&times);
    Ok(HittingStats { n_paths, mean, standard_error, hits: times.len() as u64, censored })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitStats {
    pub n_paths: u64,
    /// Fraction of decided paths that entered `(0, a]` first.
    pub probability: f64,
    pub standard_error: f64,
    pub lower: u64,
    pub upper: u64,
    pub censored: u64,
}

/// Monte Carlo estimate of `P(τ_{x,a} < τ_{x,b})`.
pub fn mc_exit_probability(an: &Analysis, x: f64, a: f64, b: f64, config: &SimConfig, n_paths: u64) -> Result<ExitStats> {
    config.validate()?;
    if !(0.0 < a && a < b && a <= x && x <= b) {
        return invalid(format!("need 0 < a ≤ x ≤ b with a < b, got a = {a}, x = {x}, b = {b}"));
    }
    if n_paths < 1 {
        return invalid("n_paths must be at least 1");
    }
    let stop = StopRule { below: Some(a), above: Some(b) };
    let runs = par_streams(n_paths, config.seed, |rng| simulate_path_until(an, x, config, rng, stop));
    let (mut lower, mut upper, mut censored) = (0u64, 0u64, 0u64);
    for r in runs {
        match r?.termination {
            Termination::HitLower => lower += 1,
            Termination::HitUpper => upper += 1,
            _ => censored += 1,
        }
    }
    let decided = (lower + upper).max(1) as f64;
    let p = lower as f64 / decided;
    Ok(ExitStats { n_paths, probability: p, standard_error: (p * (1.0 - p) / decided).sqrt(), lower, upper, censored })
}
