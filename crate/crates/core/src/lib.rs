//! Topic mining for timestamped comment corpora.
//!
//! The pipeline runs ingestion ([`corpus`]), normalization ([`textnorm`]),
//! vocabulary building ([`vocab`]), LDA training by collapsed Gibbs sampling
//! ([`lda`]), then reporting ([`report`], [`trends`]). [`eval`] holds the
//! planted-topic harness used to check the sampler end to end.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod lda;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod textnorm;
pub mod trends;
pub mod vocab;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LdaConfig = lda::LdaConfig<f64>;
pub type LdaConfigF32 = lda::LdaConfig<f32>;
pub type LdaModel = lda::Model<f64>;
pub type LdaModelF32 = lda::Model<f32>;
pub type Sampler = lda::Sampler<f64>;
pub type TopicSummary = report::TopicSummary<f64>;
pub type TrendSeries = trends::TrendSeries<f64>;
pub type WordCloud = report::WordCloud<f64>;
