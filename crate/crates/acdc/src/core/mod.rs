//! Shared domain types, reproducible random-stream management, and small
//! numeric utilities used by every other module.

mod rng;
pub mod stats;
mod types;

pub use rng::{derive_seed, substream, RngStream};
pub use types::{
    Dataset, GenerativeModel, ParameterPoint, Particle, ParticleSet, SummaryVector,
};
