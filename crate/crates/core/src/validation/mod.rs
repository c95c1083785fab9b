//! Acceptance criteria as runnable checks, grouped into named suites.
//!
//! Each criterion reports pass or fail together with the measured numbers.
//! When the caller shrinks a Monte Carlo sample below a criterion's nominal
//! size, a statistical miss is downgraded to a warning instead of a failure.

mod criteria;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 12345;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    ClosedForms,
    MonteCarlo,
    Duality,
    Hawkes,
    ShotNoise,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["closedforms", "montecarlo", "duality", "hawkes", "shotnoise", "all"];

    pub fn criteria(self) -> Vec<u8> {
        match self {
            Self::ClosedForms => vec![1, 2, 12],
            Self::MonteCarlo => vec![3, 4, 5, 6, 7, 11],
            Self::Duality => vec![10],
            Self::Hawkes => vec![8],
            Self::ShotNoise => vec![9],
            Self::All => (1..=12).collect(),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "closedforms" => Self::ClosedForms,
            "montecarlo" => Self::MonteCarlo,
            "duality" => Self::Duality,
            "hawkes" => Self::Hawkes,
            "shotnoise" => Self::ShotNoise,
            "all" => Self::All,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown suite `{other}`; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Warn => "WARN",
            Self::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:>2} {:<26} {:>7.2}s  {}", self.status, self.id, self.name, self.elapsed_secs, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Overrides every Monte Carlo sample size.
    pub paths: Option<u64>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, paths: None }
    }
}

impl ValidationOptions {
    fn paths(&self, nominal: u64) -> u64 {
        self.paths.unwrap_or(nominal)
    }

    fn reduced(&self, nominal: u64) -> bool {
        self.paths.is_some_and(|p| p < nominal)
    }
}

/// What a criterion measured: `ok`, the nominal sample size when the
/// criterion is statistical, and a one-line summary.
pub(crate) struct Check {
    ok: bool,
    nominal: Option<u64>,
    detail: String,
}

impl Check {
    fn exact(ok: bool, detail: String) -> Self {
        Self { ok, nominal: None, detail }
    }

    fn statistical(ok: bool, nominal: u64, detail: String) -> Self {
        Self { ok, nominal: Some(nominal), detail }
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    criteria::TABLE.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1)
}

pub fn run_criterion(id: u8, opts: &ValidationOptions) -> CriterionOutcome {
    let start = Instant::now();
    let name = criterion_name(id);
    let (status, detail) = match criteria::TABLE.iter().find(|c| c.0 == id) {
        None => (Status::Fail, format!("no criterion with id {id}")),
        Some(&(_, _, run)) => match run(opts) {
            Ok(c) if c.ok => (Status::Pass, c.detail),
            Ok(c) if c.nominal.is_some_and(|n| opts.reduced(n)) => {
                (Status::Warn, format!("insufficient sample ({} < {}): {}", opts.paths.unwrap_or(0), c.nominal.unwrap_or(0), c.detail))
            }
            Ok(c) => (Status::Fail, c.detail),
            Err(e) => (Status::Fail, format!("error: {e}")),
        },
    };
    CriterionOutcome { id, name, status, detail, elapsed_secs: start.elapsed().as_secs_f64() }
}

pub fn run_suite(suite: Suite, opts: &ValidationOptions) -> Vec<CriterionOutcome> {
    suite.criteria().into_iter().map(|id| run_criterion(id, opts)).collect()
}

/// Like [`run_suite`] but hands each outcome to `report` as soon as it is known.
pub fn run_suite_with(suite: Suite, opts: &ValidationOptions, mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    suite
        .criteria()
        .into_iter()
        .map(|id| {
            let o = run_criterion(id, opts);
            report(&o);
            o
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip_and_cover_everything() {
        let mut seen: Vec<u8> = Vec::new();
        for name in Suite::NAMES {
            let s: Suite = name.parse().unwrap();
            if s != Suite::All {
                seen.extend(s.criteria());
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, Suite::All.criteria());
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn every_criterion_is_named() {
        for id in 1..=12 {
            assert_ne!(criterion_name(id), "unknown");
        }
        assert_eq!(run_criterion(13, &ValidationOptions::default()).status, Status::Fail);
    }

    #[test]
    fn closed_form_suite_passes() {
        for o in run_suite(Suite::ClosedForms, &ValidationOptions::default()) {
            assert_eq!(o.status, Status::Pass, "{o}");
        }
    }

    #[test]
    fn small_samples_warn_rather_than_fail() {
        let o = run_criterion(9, &ValidationOptions { paths: Some(20), ..Default::default() });
        assert_ne!(o.status, Status::Fail, "{o}");
    }
}
