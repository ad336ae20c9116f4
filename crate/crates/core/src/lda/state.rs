use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vocab::Document;

/// Count matrices implied by a topic assignment.
///
/// Topic-word counts are stored word-major (`V x K`) so the sampler reads
/// one contiguous row per token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicCounts {
    topics: usize,
    vocab: usize,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    doc_len: Vec<u32>,
}

impl TopicCounts {
    pub(crate) fn zeros(n_docs: usize, topics: usize, vocab: usize) -> Self {
        TopicCounts {
            topics,
            vocab,
            doc_topic: vec![0; n_docs * topics],
            word_topic: vec![0; vocab * topics],
            topic_totals: vec![0; topics],
            doc_len: vec![0; n_docs],
        }
    }

    pub fn n_topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn n_docs(&self) -> usize {
        self.doc_len.len()
    }

    pub fn doc_topic(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.topics + k]
    }

    pub fn doc_topic_row(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.topics..(d + 1) * self.topics]
    }

    pub fn topic_word(&self, k: usize, w: usize) -> u32 {
        self.word_topic[w * self.topics + k]
    }

    pub(crate) fn word_topic_row(&self, w: usize) -> &[u32] {
        &self.word_topic[w * self.topics..(w + 1) * self.topics]
    }

    pub fn topic_total(&self, k: usize) -> u32 {
        self.topic_totals[k]
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    pub fn doc_len(&self, d: usize) -> u32 {
        self.doc_len[d]
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_len.iter().map(|&n| n as u64).sum()
    }

    #[inline]
    pub(crate) fn add(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[d * self.topics + k] += 1;
        self.word_topic[w * self.topics + k] += 1;
        self.topic_totals[k] += 1;
    }

    #[inline]
    pub(crate) fn remove(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[d * self.topics + k] -= 1;
        self.word_topic[w * self.topics + k] -= 1;
        self.topic_totals[k] -= 1;
    }

    /// Checks the four conservation identities between the matrices.
    pub fn check_invariants(&self) -> Result<(), String> {
        let k = self.topics;
        for d in 0..self.n_docs() {
            let s: u64 = self.doc_topic_row(d).iter().map(|&c| c as u64).sum();
            if s != self.doc_len[d] as u64 {
                return Err(format!("doc {d}: topic counts sum to {s}, length {}", self.doc_len[d]));
            }
        }
        let mut per_topic = vec![0u64; k];
        for w in 0..self.vocab {
            for (t, &c) in self.word_topic_row(w).iter().enumerate() {
                per_topic[t] += c as u64;
            }
        }
        for (t, (&sum, &total)) in per_topic.iter().zip(&self.topic_totals).enumerate() {
            if sum != total as u64 {
                return Err(format!("topic {t}: word counts sum to {sum}, total {total}"));
            }
        }
        let all: u64 = self.topic_totals.iter().map(|&c| c as u64).sum();
        if all != self.total_tokens() {
            return Err(format!("topic totals {all} != token count {}", self.total_tokens()));
        }
        Ok(())
    }
}

/// Token-topic assignments plus the counts and RNG of a Gibbs chain.
#[derive(Clone, Debug)]
pub struct SamplerState {
    pub(crate) words: Vec<u32>,
    pub(crate) topics: Vec<u32>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) counts: TopicCounts,
    pub(crate) rng: ChaCha8Rng,
}

impl PartialEq for SamplerState {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
            && self.topics == other.topics
            && self.offsets == other.offsets
            && self.counts == other.counts
            && self.rng == other.rng
    }
}

fn flatten(documents: &[Document], vocab_size: usize) -> Result<(Vec<u32>, Vec<usize>)> {
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut words = Vec::with_capacity(documents.iter().map(Document::len).sum());
    let mut offsets = Vec::with_capacity(documents.len() + 1);
    offsets.push(0);
    for doc in documents {
        if doc.is_empty() {
            return Err(Error::EmptyDocument);
        }
        for &w in &doc.word_ids {
            if w >= vocab_size {
                return Err(Error::OutOfVocabulary { id: w, v: vocab_size });
            }
            words.push(w as u32);
        }
        offsets.push(words.len());
    }
    Ok((words, offsets))
}

impl SamplerState {
    /// Builds a state from explicit per-document assignments.
    pub fn from_assignments(
        documents: &[Document],
        vocab_size: usize,
        n_topics: usize,
        assignments: &[Vec<usize>],
        seed: u64,
    ) -> Result<Self> {
        let (words, offsets) = flatten(documents, vocab_size)?;
        if assignments.len() != documents.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} assignment rows for {} documents",
                assignments.len(),
                documents.len()
            )));
        }
        let mut topics = Vec::with_capacity(words.len());
        for (doc, z) in documents.iter().zip(assignments) {
            if z.len() != doc.len() {
                return Err(Error::DimensionMismatch(format!(
                    "document `{}` has {} tokens but {} assignments",
                    doc.comment_id,
                    doc.len(),
                    z.len()
                )));
            }
            for &k in z {
                if k >= n_topics {
                    return Err(Error::UnknownTopic { topic: k, k: n_topics });
                }
                topics.push(k as u32);
            }
        }
        Ok(Self::assemble(words, topics, offsets, vocab_size, n_topics, seed))
    }

    fn assemble(
        words: Vec<u32>,
        topics: Vec<u32>,
        offsets: Vec<usize>,
        vocab_size: usize,
        n_topics: usize,
        seed: u64,
    ) -> Self {
        let n_docs = offsets.len() - 1;
        let mut counts = TopicCounts::zeros(n_docs, n_topics, vocab_size);
        for d in 0..n_docs {
            let (a, b) = (offsets[d], offsets[d + 1]);
            counts.doc_len[d] = (b - a) as u32;
            for i in a..b {
                counts.add(d, words[i] as usize, topics[i] as usize);
            }
        }
        SamplerState {
            words,
            topics,
            offsets,
            counts,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn counts(&self) -> &TopicCounts {
        &self.counts
    }

    pub fn n_docs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn doc_words(&self, d: usize) -> &[u32] {
        &self.words[self.offsets[d]..self.offsets[d + 1]]
    }

    /// Current topic of every token of document `d`.
    pub fn doc_topics(&self, d: usize) -> &[u32] {
        &self.topics[self.offsets[d]..self.offsets[d + 1]]
    }

    pub fn assignments(&self) -> Vec<Vec<usize>> {
        (0..self.n_docs())
            .map(|d| self.doc_topics(d).iter().map(|&k| k as usize).collect())
            .collect()
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }
}

/// Draws every token's topic uniformly from `0..n_topics` with an RNG seeded
/// from `seed`.
pub fn init_assignments(documents: &[Document], vocab_size: usize, n_topics: usize, seed: u64) -> Result<SamplerState> {
    if n_topics < 1 {
        return Err(Error::InvalidConfig("topic count must be at least 1".into()));
    }
    let (words, offsets) = flatten(documents, vocab_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = (0..words.len()).map(|_| rng.random_range(0..n_topics as u32)).collect();
    let mut state = SamplerState::assemble(words, topics, offsets, vocab_size, n_topics, seed);
    state.rng = rng;
    Ok(state)
}
