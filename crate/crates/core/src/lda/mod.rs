//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//!
//! Only the token-topic assignments are sampled; theta and phi are
//! integrated out and re-estimated from the counts of the final sweep. The
//! conditional for one token is
//!
//! ```text
//! p(z = k | rest) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
//! ```
//!
//! with every count taken over all other tokens.

mod model;
mod sampler;
mod snapshot;
mod state;

pub use model::Model;
pub use sampler::{full_conditional, log_likelihood, sweep, train, train_with_progress, LdaConfig, Sampler};
pub use snapshot::{
    read_snapshot, read_snapshot_from, write_snapshot, write_snapshot_to, SNAPSHOT_FORMAT, SNAPSHOT_VERSION,
};
pub use state::{init_assignments, SamplerState, TopicCounts};
