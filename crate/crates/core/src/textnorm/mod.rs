//! Text normalization: tokenization, stop-word removal, length and numeric
//! filtering, and optional Porter stemming.

mod porter;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::stem;

const DEFAULT_STOPLIST: &str = include_str!("../../data/stopwords_en.txt");

/// A set of lowercase terms to discard.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist(
            terms
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    /// Parses the stoplist file format: one term per line, `#` comments.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPLIST)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormConfig {
    pub stoplist: Stoplist,
    pub stemming_enabled: bool,
    pub min_token_len: usize,
    pub max_token_len: usize,
    pub drop_numeric: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            stoplist: Stoplist::english(),
            stemming_enabled: false,
            min_token_len: 2,
            max_token_len: 30,
            drop_numeric: true,
        }
    }
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_len < 1 || self.min_token_len > self.max_token_len {
            return Err(Error::InvalidConfig(format!(
                "token length bounds must satisfy 1 <= min ({}) <= max ({})",
                self.min_token_len, self.max_token_len
            )));
        }
        Ok(())
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}')
}

/// Splits text into lowercase runs of letters and digits. An apostrophe
/// between two word characters is dropped and the halves rejoined.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c) && !current.is_empty() && chars.peek().is_some_and(|n| n.is_alphanumeric()) {
            continue;
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn remove_stopwords(tokens: Vec<String>, stoplist: &Stoplist) -> Vec<String> {
    tokens.into_iter().filter(|t| !stoplist.contains(t)).collect()
}

fn is_numeric(token: &str) -> bool {
    token.chars().all(char::is_numeric)
}

/// Full pipeline: tokenize, drop stop words, apply length and numeric
/// filters, then stem if enabled.
pub fn normalize(text: &str, config: &NormConfig) -> Vec<String> {
    let tokens = remove_stopwords(tokenize(text), &config.stoplist);
    tokens
        .into_iter()
        .filter(|t| {
            let n = t.chars().count();
            n >= config.min_token_len && n <= config.max_token_len
        })
        .filter(|t| !(config.drop_numeric && is_numeric(t)))
        .map(|t| if config.stemming_enabled { stem(&t) } else { t })
        .collect()
}
