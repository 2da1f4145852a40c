//! The slice Gibbs sampler.
//!
//! One sweep updates, in order: slice and stick-breaking variables,
//! latent scales, atoms, coefficients, the covariance matrix, the graph,
//! the allocation variables and the mixing probabilities. The infinite
//! mixture is handled by slice sampling: only the sticks needed to cover
//! `1 - min(u)` are represented.

mod chain;
mod design;
mod hyper;
mod joint;
mod state;

pub use chain::Sampler;
pub use design::DesignData;
pub use hyper::{Hyperparameters, McmcSettings, SamplerMode};
pub use joint::log_joint;
pub use state::{AdaptCounters, Atom, ChainState, DrawRecord};
