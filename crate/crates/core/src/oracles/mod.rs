//! Independent constructions of two linear special cases, used to
//! cross-check the generic analysis and sampler.
//!
//! * [`hawkes`]: the linear self-exciting process built as a branching
//!   cluster of inhomogeneous Poisson processes.
//! * [`shotnoise`]: filtered Poisson shot-noise with exponential response
//!   and its stationary Laplace transform from Campbell's formula.

pub mod hawkes;
pub mod shotnoise;

pub use hawkes::{
    hawkes_cluster_simulate, hawkes_superposition_value, large_cluster_fraction, offspring_mean, HawkesCluster,
    HawkesJump, HawkesParams, OffspringEstimate,
};
pub use shotnoise::{campbell_lst, shotnoise_simulate_value, shotnoise_stationary_lst, ShotNoiseParams};
