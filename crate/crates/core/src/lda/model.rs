use ndarray::Array2;

use super::sampler::LdaConfig;
use super::state::{SamplerState, TopicCounts};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vocab::{Document, Vocabulary};

/// A trained topic model: final counts plus the smoothed estimates
/// `theta[d][k] = (n_dk + alpha) / (N_d + K alpha)` and
/// `phi[k][w] = (n_kw + beta) / (n_k + V beta)`.
#[derive(Clone, Debug)]
pub struct Model<F: Scalar> {
    config: LdaConfig<F>,
    vocabulary: Vocabulary,
    documents: Vec<Document>,
    assignments: Vec<Vec<usize>>,
    counts: TopicCounts,
    theta: Array2<F>,
    phi: Array2<F>,
    log_likelihood_trace: Vec<F>,
}

impl<F: Scalar> Model<F> {
    pub(crate) fn from_state(
        config: LdaConfig<F>,
        vocabulary: Vocabulary,
        documents: Vec<Document>,
        state: &SamplerState,
        log_likelihood_trace: Vec<F>,
    ) -> Self {
        let counts = state.counts().clone();
        let (theta, phi) = estimate(&counts, &config);
        Model {
            config,
            vocabulary,
            documents,
            assignments: state.assignments(),
            counts,
            theta,
            phi,
            log_likelihood_trace,
        }
    }

    /// Rebuilds a model from stored assignments, as when reloading a
    /// snapshot.
    pub fn from_assignments(
        config: LdaConfig<F>,
        vocabulary: Vocabulary,
        documents: Vec<Document>,
        assignments: &[Vec<usize>],
        log_likelihood_trace: Vec<F>,
    ) -> Result<Self> {
        config.validate()?;
        let state =
            SamplerState::from_assignments(&documents, vocabulary.len(), config.topics, assignments, config.seed)?;
        Ok(Self::from_state(
            config,
            vocabulary,
            documents,
            &state,
            log_likelihood_trace,
        ))
    }

    pub fn config(&self) -> &LdaConfig<F> {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn counts(&self) -> &TopicCounts {
        &self.counts
    }

    pub fn n_topics(&self) -> usize {
        self.config.topics
    }

    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Document-topic distribution, `D x K`.
    pub fn theta(&self) -> &Array2<F> {
        &self.theta
    }

    /// Topic-word distribution, `K x V`.
    pub fn phi(&self) -> &Array2<F> {
        &self.phi
    }

    pub fn log_likelihood_trace(&self) -> &[F] {
        &self.log_likelihood_trace
    }

    pub fn check_topic(&self, topic: usize) -> Result<()> {
        if topic < self.n_topics() {
            Ok(())
        } else {
            Err(Error::UnknownTopic {
                topic,
                k: self.n_topics(),
            })
        }
    }
}

pub(crate) fn estimate<F: Scalar>(counts: &TopicCounts, config: &LdaConfig<F>) -> (Array2<F>, Array2<F>) {
    let (d, k, v) = (counts.n_docs(), counts.n_topics(), counts.vocab_size());
    let (alpha, beta) = (config.alpha, config.beta);
    let kalpha = alpha * F::of_count(k);
    let vbeta = beta * F::of_count(v);
    let theta = Array2::from_shape_fn((d, k), |(doc, t)| {
        (F::of_count(counts.doc_topic(doc, t)) + alpha) / (F::of_count(counts.doc_len(doc)) + kalpha)
    });
    let phi = Array2::from_shape_fn((k, v), |(t, w)| {
        (F::of_count(counts.topic_word(t, w)) + beta) / (F::of_count(counts.topic_total(t)) + vbeta)
    });
    (theta, phi)
}
