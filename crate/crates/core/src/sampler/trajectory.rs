use std::io::Write;

use serde::Serialize;

use crate::analysis::Analysis;
use crate::calculus::{integrate, QuadratureError};
use crate::error::{Error, Result};
use crate::model::FlowForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    AbsorbedAtZero,
    ExplosionGuardTripped,
    /// Entered the lower stop region `[0, a]`.
    HitLower,
    /// Jumped into the upper stop region `[b, ∞)`.
    HitUpper,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HorizonReached => "horizon_reached",
            Self::AbsorbedAtZero => "absorbed_at_zero",
            Self::ExplosionGuardTripped => "explosion_guard_tripped",
            Self::HitLower => "hit_lower",
            Self::HitUpper => "hit_upper",
        }
    }
}

/// A simulated path. Between jumps it follows the deterministic flow;
/// `pre_jump[n]` is the left limit at `jump_times[n]`, `post_jump[n]` the
/// value right after.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub x0: f64,
    pub jump_times: Vec<f64>,
    pub pre_jump: Vec<f64>,
    pub post_jump: Vec<f64>,
    /// Times at which the flow reached 0.
    pub zero_visits: Vec<f64>,
    pub termination: Termination,
    pub end_time: f64,
    pub final_value: f64,
}

impl Trajectory {
    pub(crate) fn start(x0: f64) -> Self {
        Self {
            x0,
            jump_times: Vec::new(),
            pre_jump: Vec::new(),
            post_jump: Vec::new(),
            zero_visits: Vec::new(),
            termination: Termination::HorizonReached,
            end_time: 0.0,
            final_value: x0,
        }
    }

    pub(crate) fn push_jump(&mut self, t: f64, pre: f64, post: f64) {
        self.jump_times.push(t);
        self.pre_jump.push(pre);
        self.post_jump.push(post);
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// `Tₙ = Sₙ − Sₙ₋₁` with `S₀ = 0`.
    pub fn inter_jump_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.jump_times
            .iter()
            .map(|&s| {
                let d = s - prev;
                prev = s;
                d
            })
            .collect()
    }

    /// Flow segments as `(start value, end value)`, in time order.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.jump_count() + 1);
        let mut start = self.x0;
        for (&pre, &post) in self.pre_jump.iter().zip(&self.post_jump) {
            out.push((start, pre));
            start = post;
        }
        out.push((start, self.final_value));
        out
    }

    /// `∫_0^{end} X_t^p dt` for `p > 0`, exact along each flow segment via
    /// `dt = dy/α(y)`. Time spent resting at 0 contributes nothing.
    pub fn time_integral(&self, an: &Analysis, p: f64) -> Result<f64> {
        let mut total = 0.0;
        for (s, e) in self.segments() {
            total += segment_integral(an, p, e, s)?;
        }
        Ok(total)
    }
}

/// `∫_e^s y^p/α(y) dy`.
fn segment_integral(an: &Analysis, p: f64, e: f64, s: f64) -> Result<f64> {
    if s <= e {
        return Ok(0.0);
    }
    if let Some(FlowForm::Power { coef, exponent }) = an.closed_forms().flow {
        let q = p - exponent + 1.0;
        return Ok(if q == 0.0 { (s / e).ln() / coef } else { (s.powf(q) - e.powf(q)) / (coef * q) });
    }
    let alpha = &an.model().alpha;
    let f = |y: f64| y.powf(p) / alpha.evaluate(y);
    match integrate(&f, e, s, 1e-12) {
        Ok(r) => Ok(r.value),
        Err(QuadratureError::NoConvergence { best, .. }) => Ok(best.value),
        Err(err) => Err(Error::Quadrature(err)),
    }
}

#[derive(Serialize)]
struct EventRow {
    path_id: u64,
    event_index: usize,
    time: f64,
    pre_jump_value: f64,
    post_jump_value: f64,
}

/// CSV with columns `path_id, event_index, time, pre_jump_value,
/// post_jump_value`. Event 0 is the initial state; jumps follow.
pub fn write_trajectories_csv<'a, W: Write>(out: W, paths: impl IntoIterator<Item = (u64, &'a Trajectory)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    for (id, tr) in paths {
        w.serialize(EventRow { path_id: id, event_index: 0, time: 0.0, pre_jump_value: tr.x0, post_jump_value: tr.x0 })
            .map_err(io)?;
        for n in 0..tr.jump_count() {
            w.serialize(EventRow {
                path_id: id,
                event_index: n + 1,
                time: tr.jump_times[n],
                pre_jump_value: tr.pre_jump[n],
                post_jump_value: tr.post_jump[n],
            })
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}
