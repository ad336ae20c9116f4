//! Comments to encoded documents: normalize, build the vocabulary, encode.

use crate::corpus::Comment;
use crate::error::{Error, Result};
use crate::textnorm::{normalize, NormConfig};
use crate::vocab::{build_vocabulary, encode, Document, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VocabConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            min_df: 5,
            max_df_ratio: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Prepared {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    /// Comments left with no in-vocabulary token, by id.
    pub dropped: Vec<String>,
}

pub fn prepare_documents(comments: &[Comment], norm: &NormConfig, vocab: VocabConfig) -> Result<Prepared> {
    norm.validate()?;
    let tokens: Vec<Vec<String>> = comments.iter().map(|c| normalize(&c.text, norm)).collect();
    let vocabulary = build_vocabulary(&tokens, vocab.min_df, vocab.max_df_ratio)?;
    let mut documents = Vec::with_capacity(comments.len());
    let mut dropped = Vec::new();
    for (comment, toks) in comments.iter().zip(&tokens) {
        match encode(toks, &vocabulary, comment) {
            Ok(doc) => documents.push(doc),
            Err(Error::EmptyDocument) => dropped.push(comment.id.clone()),
            Err(e) => return Err(e),
        }
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Prepared {
        documents,
        vocabulary,
        dropped,
    })
}
