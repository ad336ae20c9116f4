//! Topic tables, prior topic weights and word-cloud weights.
//!
//! PTW (prior topic weight) is the percentage of corpus tokens assigned to a
//! topic in the final sample: `100 * n_k / sum_j n_j`.

mod labels;

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lda::Model;
use crate::scalar::Scalar;

pub use labels::{agreement, apply_labels, resolve_label, Agreement, Annotation, LabelResolution, LabelStore};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct TermWeight<F> {
    pub term: String,
    pub weight: F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct TopicSummary<F> {
    pub topic_id: usize,
    pub ptw: F,
    pub top_terms: Vec<TermWeight<F>>,
    pub label: Option<String>,
    pub label_conflict: bool,
    pub label_annotations: Vec<Annotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct WordCloud<F> {
    pub topic_id: usize,
    pub terms: Vec<TermWeight<F>>,
}

pub fn ptw<F: Scalar>(model: &Model<F>, topic: usize) -> Result<F> {
    model.check_topic(topic)?;
    Ok(ptw_all(model)[topic])
}

pub fn ptw_all<F: Scalar>(model: &Model<F>) -> Vec<F> {
    let counts = model.counts();
    let total = counts.total_tokens();
    let hundred = F::of(100.0);
    counts
        .topic_totals()
        .iter()
        .map(|&n| {
            if total == 0 {
                F::zero()
            } else {
                hundred * F::of_count(n) / F::of_count(total)
            }
        })
        .collect()
}

/// Sorts `(topic_id, ptw)` pairs by descending PTW, ties by ascending id.
pub fn rank_by_ptw<F: Scalar>(pairs: impl IntoIterator<Item = (usize, F)>) -> Vec<(usize, F)> {
    let mut v: Vec<(usize, F)> = pairs.into_iter().collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    v
}

/// The `n` highest-probability terms of a topic, ties by ascending word id.
pub fn top_terms<F: Scalar>(model: &Model<F>, topic: usize, n: usize) -> Result<Vec<TermWeight<F>>> {
    model.check_topic(topic)?;
    let row = model.phi().row(topic);
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    ids.truncate(n);
    Ok(ids
        .into_iter()
        .map(|w| TermWeight {
            term: model.vocabulary().term(w).expect("id within vocabulary").to_string(),
            weight: row[w],
        })
        .collect())
}

/// `top_terms` rescaled so the heaviest term has weight 1.
pub fn wordcloud_weights<F: Scalar>(model: &Model<F>, topic: usize, n: usize) -> Result<WordCloud<F>> {
    let mut terms = top_terms(model, topic, n)?;
    if let Some(max) = terms.first().map(|t| t.weight) {
        for t in &mut terms {
            t.weight /= max;
        }
    }
    Ok(WordCloud { topic_id: topic, terms })
}

/// Summaries for every topic, ranked by PTW, with labels unset.
pub fn summarize<F: Scalar>(model: &Model<F>, n_terms: usize) -> Vec<TopicSummary<F>> {
    rank_by_ptw(ptw_all(model).into_iter().enumerate())
        .into_iter()
        .map(|(topic_id, ptw)| TopicSummary {
            topic_id,
            ptw,
            top_terms: top_terms(model, topic_id, n_terms).expect("topic in range"),
            label: None,
            label_conflict: false,
            label_annotations: Vec::new(),
        })
        .collect()
}

/// Writes `rank,topic_id,ptw,label,term_1..term_n` for the given ranked
/// summaries.
pub fn write_topics_csv<F: Scalar, W: Write>(summaries: &[TopicSummary<F>], n_terms: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["rank".to_string(), "topic_id".into(), "ptw".into(), "label".into()];
    header.extend((1..=n_terms).map(|i| format!("term_{i}")));
    w.write_record(&header)?;
    for (rank, s) in summaries.iter().enumerate() {
        let mut row = vec![
            (rank + 1).to_string(),
            s.topic_id.to_string(),
            s.ptw.to_string(),
            s.label.clone().unwrap_or_default(),
        ];
        row.extend((0..n_terms).map(|i| s.top_terms.get(i).map(|t| t.term.clone()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| crate::error::Error::Csv(e.into()))?;
    Ok(())
}
