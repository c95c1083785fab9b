//! Decay-surge piecewise-deterministic Markov processes with separable
//! jump kernels: model definition, analysis, exact simulation and
//! cross-validation oracles.

pub mod analysis;
pub mod calculus;
pub mod chains;
pub mod duality;
pub mod error;
pub mod extreal;
pub mod model;
pub mod oracles;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
