//! Verification harness: planted-topic corpus generation, topic matching
//! under label switching, and perplexity.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::Comment;
use crate::error::{Error, Result};
use crate::lda::{LdaConfig, Model, Sampler};
use crate::scalar::Scalar;
use crate::vocab::{Document, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum DocLength {
    Fixed(usize),
    Poisson(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum PlantedPhi {
    /// Topic k spreads `own_mass` uniformly over its own disjoint block of
    /// `V / K` words and the rest uniformly over all other words.
    Block {
        own_mass: f64,
    },
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub vocab_size: usize,
    pub docs: usize,
    pub doc_length: DocLength,
    pub alpha_gen: f64,
    pub planted: PlantedPhi,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 5,
            vocab_size: 200,
            docs: 1000,
            doc_length: DocLength::Poisson(50.0),
            alpha_gen: 0.1,
            planted: PlantedPhi::Block { own_mass: 0.8 },
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.topics < 1 || self.vocab_size < 1 || self.docs < 1 {
            return bad("topics, vocab_size and docs must be positive");
        }
        if self.alpha_gen.is_nan() || self.alpha_gen <= 0.0 {
            return bad("alpha_gen must be positive");
        }
        match self.doc_length {
            DocLength::Fixed(0) => return bad("document length must be positive"),
            DocLength::Poisson(m) if m.is_nan() || m <= 0.0 => return bad("document length mean must be positive"),
            _ => {}
        }
        if let PlantedPhi::Block { own_mass } = self.planted {
            if !(own_mass > 0.0 && own_mass <= 1.0) {
                return bad("block mass must lie in (0, 1]");
            }
            if self.vocab_size < self.topics {
                return bad("block construction needs vocab_size >= topics");
            }
            if own_mass < 1.0 && self.topics == 1 {
                return bad("a single topic has no words outside its block");
            }
        }
        Ok(())
    }

    pub fn planted_phi(&self) -> Array2<f64> {
        let (k, v) = (self.topics, self.vocab_size);
        match self.planted {
            PlantedPhi::Uniform => Array2::from_elem((k, v), 1.0 / v as f64),
            PlantedPhi::Block { own_mass } => {
                let block = v / k;
                let others = (v - block) as f64;
                Array2::from_shape_fn((k, v), |(t, w)| {
                    if w >= t * block && w < (t + 1) * block {
                        own_mass / block as f64
                    } else {
                        (1.0 - own_mass) / others
                    }
                })
            }
        }
    }
}

/// Letter-only name for synthetic word `i`, so rendered text survives
/// normalization unchanged.
pub fn synthetic_term(i: usize) -> String {
    let mut s = String::from("wq");
    let mut n = i;
    for _ in 0..3 {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
    }
    s
}

pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub true_theta: Array2<f64>,
    pub true_phi: Array2<f64>,
}

impl SyntheticCorpus {
    /// Renders documents as comments whose text is the space-joined terms.
    pub fn to_comments(&self) -> Vec<Comment> {
        self.documents
            .iter()
            .map(|d| Comment {
                id: d.comment_id.clone(),
                user_id: "synthetic".into(),
                timestamp: d.timestamp,
                text: self.vocabulary.decode(&d.word_ids).join(" "),
            })
            .collect()
    }
}

/// Draws from a symmetric Dirichlet via Gamma variates in log space, so
/// tiny concentrations do not underflow to an all-zero vector.
pub fn sample_dirichlet<R: Rng>(rng: &mut R, alpha: f64, k: usize) -> Vec<f64> {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    let gamma = Gamma::new(alpha + 1.0, 1.0).expect("positive shape");
    let logs: Vec<f64> = (0..k)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            g.ln() + u.ln() / alpha
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Samples a corpus from the LDA generative process with planted topics.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phi = spec.planted_phi();
    let word_dists: Vec<WeightedIndex<f64>> = phi
        .rows()
        .into_iter()
        .map(|row| WeightedIndex::new(row.iter().copied()).expect("valid planted row"))
        .collect();
    let poisson = match spec.doc_length {
        DocLength::Poisson(mean) => Some(Poisson::new(mean).expect("positive mean")),
        DocLength::Fixed(_) => None,
    };
    let mut theta = Array2::zeros((spec.docs, spec.topics));
    let mut documents = Vec::with_capacity(spec.docs);
    for d in 0..spec.docs {
        let row = sample_dirichlet(&mut rng, spec.alpha_gen, spec.topics);
        let topic_dist = WeightedIndex::new(&row).expect("dirichlet draw is a distribution");
        for (k, p) in row.iter().enumerate() {
            theta[[d, k]] = *p;
        }
        let len = match (spec.doc_length, &poisson) {
            (DocLength::Fixed(n), _) => n,
            (_, Some(p)) => (p.sample(&mut rng) as usize).max(1),
            _ => unreachable!(),
        };
        let word_ids = (0..len)
            .map(|_| word_dists[topic_dist.sample(&mut rng)].sample(&mut rng))
            .collect();
        documents.push(Document {
            comment_id: format!("syn{d:06}"),
            word_ids,
            timestamp: None,
        });
    }
    let vocabulary = Vocabulary::from_parts(
        (0..spec.vocab_size).map(synthetic_term).collect(),
        document_frequencies(&documents, spec.vocab_size),
    )?;
    Ok(SyntheticCorpus {
        documents,
        vocabulary,
        true_theta: theta,
        true_phi: phi,
    })
}

fn document_frequencies(documents: &[Document], v: usize) -> Vec<usize> {
    let mut df = vec![0; v];
    let mut seen = vec![usize::MAX; v];
    for (d, doc) in documents.iter().enumerate() {
        for &w in &doc.word_ids {
            if seen[w] != d {
                seen[w] = d;
                df[w] += 1;
            }
        }
    }
    df
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub recovered: usize,
    pub truth: usize,
    pub cosine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicMatching {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_recovered: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

impl TopicMatching {
    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|p| p.cosine).sum()
    }

    pub fn mean_cosine(&self) -> f64 {
        if self.pairs.is_empty() {
            0.0
        } else {
            self.total() / self.pairs.len() as f64
        }
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Greedy maximum-cosine matching without replacement. Pairs are taken in
/// order of decreasing cosine, ties by (recovered, truth) index.
pub fn match_topics<A: Scalar, B: Scalar>(recovered: &Array2<A>, truth: &Array2<B>) -> Result<TopicMatching> {
    if recovered.ncols() != truth.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "recovered topics span {} words, reference topics {}",
            recovered.ncols(),
            truth.ncols()
        )));
    }
    let rec = rows_of(recovered);
    let tru = rows_of(truth);
    let mut candidates = Vec::with_capacity(rec.len() * tru.len());
    for (i, r) in rec.iter().enumerate() {
        for (j, t) in tru.iter().enumerate() {
            candidates.push((cosine(r, t), i, j));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_r = vec![false; rec.len()];
    let mut used_t = vec![false; tru.len()];
    let mut pairs = Vec::new();
    for (c, i, j) in candidates {
        if !used_r[i] && !used_t[j] {
            used_r[i] = true;
            used_t[j] = true;
            pairs.push(MatchedPair {
                recovered: i,
                truth: j,
                cosine: c,
            });
        }
    }
    pairs.sort_by_key(|p| p.truth);
    Ok(TopicMatching {
        pairs,
        unmatched_recovered: (0..rec.len()).filter(|&i| !used_r[i]).collect(),
        unmatched_truth: (0..tru.len()).filter(|&j| !used_t[j]).collect(),
    })
}

fn rows_of<F: Scalar>(m: &Array2<F>) -> Vec<Vec<f64>> {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.as_f64()).collect())
        .collect()
}

/// `exp(-(1/N) * sum_tokens ln sum_k theta_dk phi_kw)` over the model's own
/// training documents (or any documents aligned with its theta rows).
pub fn perplexity<F: Scalar>(model: &Model<F>, documents: &[Document]) -> Result<f64> {
    if documents.len() != model.n_docs() {
        return Err(Error::DimensionMismatch(format!(
            "{} documents given, model has {} theta rows",
            documents.len(),
            model.n_docs()
        )));
    }
    let (theta, phi) = (model.theta(), model.phi());
    let v = model.vocab_size();
    let k = model.n_topics();
    let mut log_sum = 0.0;
    let mut n = 0usize;
    for (d, doc) in documents.iter().enumerate() {
        for &w in &doc.word_ids {
            if w >= v {
                return Err(Error::OutOfVocabulary { id: w, v });
            }
            let p: f64 = (0..k).map(|t| theta[[d, t]].as_f64() * phi[[t, w]].as_f64()).sum();
            log_sum += p.ln();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok((-log_sum / n as f64).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerplexitySummary {
    /// `(sweep, perplexity)` samples.
    pub trace: Vec<(usize, f64)>,
    pub first: f64,
    pub last: f64,
    pub min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: SyntheticSpec,
    pub train_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub train_seed: u64,
    pub matching: TopicMatching,
    pub matched_cosines: Vec<f64>,
    pub mean_cosine: f64,
    pub perplexity: PerplexitySummary,
    pub final_log_likelihood: f64,
    pub log_likelihood_finite: bool,
    pub threshold: f64,
    pub passed: bool,
}

/// Generates a planted corpus, trains on it and scores recovery. Perplexity
/// is sampled after sweep 1, every `perplexity_every` sweeps and at the end.
pub fn run_planted_recovery<F: Scalar>(
    spec: &SyntheticSpec,
    config: LdaConfig<F>,
    perplexity_every: usize,
    threshold: f64,
) -> Result<EvalReport> {
    let corpus = generate_synthetic_corpus(spec)?;
    let mut sampler = Sampler::new(&corpus.documents, corpus.vocabulary.len(), config.clone())?;
    let mut trace = Vec::new();
    let mut ll_finite = true;
    let mut last_ll = F::zero();
    for it in 1..=config.iterations {
        sampler.sweep();
        last_ll = sampler.log_likelihood();
        ll_finite &= last_ll.is_finite();
        if it == 1 || it == config.iterations || (perplexity_every > 0 && it % perplexity_every == 0) {
            let model = sampler.estimate(&corpus.documents, &corpus.vocabulary);
            trace.push((it, perplexity(&model, &corpus.documents)?));
        }
    }
    let model = sampler.estimate(&corpus.documents, &corpus.vocabulary);
    let matching = match_topics(model.phi(), &corpus.true_phi)?;
    let mean = matching.mean_cosine();
    let values: Vec<f64> = trace.iter().map(|t| t.1).collect();
    Ok(EvalReport {
        spec: spec.clone(),
        train_topics: config.topics,
        alpha: config.alpha.as_f64(),
        beta: config.beta.as_f64(),
        sweeps: config.iterations,
        train_seed: config.seed,
        matched_cosines: matching.pairs.iter().map(|p| p.cosine).collect(),
        matching,
        mean_cosine: mean,
        perplexity: PerplexitySummary {
            first: values[0],
            last: *values.last().expect("at least one sample"),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            trace,
        },
        final_log_likelihood: last_ll.as_f64(),
        log_likelihood_finite: ll_finite,
        threshold,
        passed: mean >= threshold && ll_finite,
    })
}
