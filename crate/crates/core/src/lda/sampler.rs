use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::state::{init_assignments, SamplerState, TopicCounts};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vocab::{Document, Vocabulary};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct LdaConfig<F> {
    pub topics: usize,
    pub alpha: F,
    pub beta: F,
    pub iterations: usize,
    pub seed: u64,
}

impl<F: Scalar> Default for LdaConfig<F> {
    fn default() -> Self {
        LdaConfig {
            topics: 100,
            alpha: F::of(0.05),
            beta: F::of(0.01),
            iterations: 1000,
            seed: 1,
        }
    }
}

impl<F: Scalar> LdaConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::InvalidConfig("topic count must be at least 1".into()));
        }
        if !(self.alpha > F::zero() && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta > F::zero() && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Unnormalized collapsed conditional for a token of word `w` in doc `d`,
/// written into `out`. `exclude` names a topic whose counts still include
/// the token being resampled. Returns the sum of the weights.
#[inline]
#[allow(clippy::too_many_arguments)]
fn conditional_weights<F: Scalar>(
    counts: &TopicCounts,
    alpha: F,
    beta: F,
    vbeta: F,
    d: usize,
    w: usize,
    exclude: Option<usize>,
    out: &mut [F],
) -> F {
    let doc = counts.doc_topic_row(d);
    let word = counts.word_topic_row(w);
    let totals = counts.topic_totals();
    let mut sum = F::zero();
    for k in 0..out.len() {
        let own = if exclude == Some(k) { 1 } else { 0 };
        let ndk = F::of_count(doc[k] - own);
        let nkw = F::of_count(word[k] - own);
        let nk = F::of_count(totals[k] - own);
        let p = (ndk + alpha) * (nkw + beta) / (nk + vbeta);
        out[k] = p;
        sum += p;
    }
    sum
}

/// Normalized conditional distribution over topics for token `i` of
/// document `d`, with that token's own assignment removed from the counts.
pub fn full_conditional<F: Scalar>(state: &SamplerState, config: &LdaConfig<F>, d: usize, i: usize) -> Vec<F> {
    let counts = state.counts();
    let w = state.doc_words(d)[i] as usize;
    let current = state.doc_topics(d)[i] as usize;
    let vbeta = config.beta * F::of_count(counts.vocab_size());
    let mut out = vec![F::zero(); counts.n_topics()];
    let sum = conditional_weights(counts, config.alpha, config.beta, vbeta, d, w, Some(current), &mut out);
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Picks an index with probability proportional to `weights` by a linear
/// scan over the cumulative sum.
#[inline]
fn draw<F: Scalar, R: Rng>(rng: &mut R, weights: &[F], total: F) -> usize {
    let u = F::of(rng.random::<f64>()) * total;
    let mut acc = F::zero();
    for (k, &p) in weights.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // Rounding left u at or past the final sum.
    weights.iter().rposition(|&p| p > F::zero()).unwrap_or(0)
}

/// One Gibbs pass: every token of every document, in order, is removed
/// from the counts, redrawn from its conditional and added back.
pub fn sweep<F: Scalar>(state: &mut SamplerState, config: &LdaConfig<F>, scratch: &mut Vec<F>) {
    let k = state.counts.n_topics();
    scratch.resize(k, F::zero());
    let vbeta = config.beta * F::of_count(state.counts.vocab_size());
    for d in 0..state.n_docs() {
        for i in state.offsets[d]..state.offsets[d + 1] {
            let w = state.words[i] as usize;
            let old = state.topics[i] as usize;
            state.counts.remove(d, w, old);
            let total = conditional_weights(&state.counts, config.alpha, config.beta, vbeta, d, w, None, scratch);
            let new = draw(&mut state.rng, scratch, total);
            state.topics[i] = new as u32;
            state.counts.add(d, w, new);
        }
    }
}

/// Collapsed log p(w, z | alpha, beta).
pub fn log_likelihood<F: Scalar>(counts: &TopicCounts, config: &LdaConfig<F>) -> F {
    let k = counts.n_topics();
    let v = counts.vocab_size();
    let (alpha, beta) = (config.alpha, config.beta);
    let kalpha = alpha * F::of_count(k);
    let vbeta = beta * F::of_count(v);
    let lg_alpha = alpha.ln_gamma();
    let lg_beta = beta.ln_gamma();

    let mut ll = F::zero();
    // p(z | alpha): one Dirichlet-multinomial per document
    let lg_kalpha = kalpha.ln_gamma();
    for d in 0..counts.n_docs() {
        ll += lg_kalpha - (F::of_count(counts.doc_len(d)) + kalpha).ln_gamma();
        for &c in counts.doc_topic_row(d) {
            if c > 0 {
                ll += (F::of_count(c) + alpha).ln_gamma() - lg_alpha;
            }
        }
    }
    // p(w | z, beta): one per topic
    let lg_vbeta = vbeta.ln_gamma();
    for t in 0..k {
        ll += lg_vbeta - (F::of_count(counts.topic_total(t)) + vbeta).ln_gamma();
    }
    for w in 0..v {
        for &c in counts.word_topic_row(w) {
            if c > 0 {
                ll += (F::of_count(c) + beta).ln_gamma() - lg_beta;
            }
        }
    }
    ll
}

/// A Gibbs chain over a fixed document set.
pub struct Sampler<F: Scalar> {
    config: LdaConfig<F>,
    state: SamplerState,
    scratch: Vec<F>,
    sweeps_done: usize,
}

impl<F: Scalar> Sampler<F> {
    pub fn new(documents: &[Document], vocab_size: usize, config: LdaConfig<F>) -> Result<Self> {
        config.validate()?;
        let state = init_assignments(documents, vocab_size, config.topics, config.seed)?;
        Ok(Sampler {
            scratch: vec![F::zero(); config.topics],
            config,
            state,
            sweeps_done: 0,
        })
    }

    pub fn sweep(&mut self) {
        sweep(&mut self.state, &self.config, &mut self.scratch);
        self.sweeps_done += 1;
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn config(&self) -> &LdaConfig<F> {
        &self.config
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn log_likelihood(&self) -> F {
        log_likelihood(self.state.counts(), &self.config)
    }

    /// Point estimates of theta and phi from the current assignment.
    pub fn estimate(&self, documents: &[Document], vocabulary: &Vocabulary) -> Model<F> {
        Model::from_state(
            self.config.clone(),
            vocabulary.clone(),
            documents.to_vec(),
            &self.state,
            Vec::new(),
        )
    }
}

/// Runs `config.iterations` sweeps and estimates the model from the final
/// state. `progress` is called after each sweep with the sweep number
/// (1-based) and the log-likelihood.
pub fn train_with_progress<F: Scalar>(
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    config: LdaConfig<F>,
    mut progress: impl FnMut(usize, F),
) -> Result<Model<F>> {
    let mut sampler = Sampler::new(&documents, vocabulary.len(), config)?;
    let mut trace = Vec::with_capacity(sampler.config.iterations);
    for it in 1..=sampler.config.iterations {
        sampler.sweep();
        let ll = sampler.log_likelihood();
        trace.push(ll);
        progress(it, ll);
    }
    Ok(Model::from_state(
        sampler.config,
        vocabulary,
        documents,
        &sampler.state,
        trace,
    ))
}

pub fn train<F: Scalar>(documents: Vec<Document>, vocabulary: Vocabulary, config: LdaConfig<F>) -> Result<Model<F>> {
    train_with_progress(documents, vocabulary, config, |_, _| {})
}
