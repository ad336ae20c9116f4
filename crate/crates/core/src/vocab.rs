//! Term/id vocabulary and document encoding.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Comment;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from raw parts; terms must be distinct.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} terms but {} document frequencies",
                terms.len(),
                doc_freq.len()
            )));
        }
        let index: HashMap<String, usize> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != terms.len() {
            return Err(Error::InvalidConfig("vocabulary terms are not distinct".into()));
        }
        Ok(Vocabulary { terms, doc_freq, index })
    }

    /// Rebuilds the lookup index after deserialization.
    pub(crate) fn reindex(mut self) -> Result<Self> {
        let terms = std::mem::take(&mut self.terms);
        let df = std::mem::take(&mut self.doc_freq);
        Self::from_parts(terms, df)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().filter_map(|&i| self.term(i)).map(str::to_string).collect()
    }

    /// `id<TAB>term<TAB>doc_freq`, one line per term.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, (t, df)) in self.terms.iter().zip(&self.doc_freq).enumerate() {
            writeln!(out, "{i}\t{t}\t{df}").expect("write to string");
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Builds a vocabulary keeping terms whose document frequency lies in
/// `[min_df, max_df_ratio * D]`. Ids go by descending document frequency,
/// ties broken lexicographically.
pub fn build_vocabulary<I, D, S>(token_streams: I, min_df: usize, max_df_ratio: f64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = D>,
    D: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_df < 1 {
        return Err(Error::InvalidConfig("min_df must be at least 1".into()));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "max_df_ratio must lie in (0, 1], got {max_df_ratio}"
        )));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    let mut n_docs = 0usize;
    for doc in token_streams {
        n_docs += 1;
        let distinct: HashSet<String> = doc.into_iter().map(|t| t.as_ref().to_string()).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let max_df = max_df_ratio * n_docs as f64;
    let mut kept: Vec<(String, usize)> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df && n as f64 <= max_df)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let (terms, doc_freq) = kept.into_iter().unzip();
    Vocabulary::from_parts(terms, doc_freq)
}

/// A comment encoded as vocabulary ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub comment_id: String,
    pub word_ids: Vec<usize>,
    pub timestamp: Option<DateTime<Utc>>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }
}

/// Maps tokens to ids, dropping out-of-vocabulary tokens.
pub fn encode<S: AsRef<str>>(tokens: &[S], vocabulary: &Vocabulary, comment: &Comment) -> Result<Document> {
    let word_ids: Vec<usize> = tokens.iter().filter_map(|t| vocabulary.id(t.as_ref())).collect();
    if word_ids.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(Document {
        comment_id: comment.id.clone(),
        word_ids,
        timestamp: comment.timestamp,
    })
}
