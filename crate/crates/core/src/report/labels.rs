//! Human topic labels: an append-only annotation log, majority resolution
//! and pairwise inter-annotator agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::TopicSummary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub topic_id: usize,
    pub annotator_id: String,
    pub label: String,
    pub timestamp: DateTime<Utc>,
}

/// Full annotation history. Later entries from the same annotator on the
/// same topic supersede earlier ones for resolution, but nothing is removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelStore {
    annotations: Vec<Annotation>,
}

fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

impl LabelStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_annotations(annotations: Vec<Annotation>) -> Self {
        LabelStore { annotations }
    }

    /// Reads the JSON list file; a missing file is an empty store.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match std::fs::read(path) {
            Ok(bytes) => Ok(LabelStore {
                annotations: serde_json::from_slice(&bytes)?,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Replaces the file atomically and syncs it before returning.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let io = |e| Error::io(path, e);
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        serde_json::to_writer_pretty(&mut tmp, &self.annotations)?;
        tmp.write_all(b"\n").map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }

    pub fn push(&mut self, annotation: Annotation) {
        self.annotations.push(annotation);
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn topics(&self) -> BTreeSet<usize> {
        self.annotations.iter().map(|a| a.topic_id).collect()
    }

    /// Each annotator's most recent annotation of `topic`, by annotator id.
    pub fn current(&self, topic: usize) -> Vec<&Annotation> {
        let mut latest: BTreeMap<&str, &Annotation> = BTreeMap::new();
        for a in self.annotations.iter().filter(|a| a.topic_id == topic) {
            latest.insert(a.annotator_id.as_str(), a);
        }
        latest.into_values().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelResolution {
    pub label: Option<String>,
    pub conflict: bool,
}

/// The label held by the most annotators (compared trimmed and
/// case-insensitively). A tie for first place leaves the topic unlabeled
/// and flags a conflict.
pub fn resolve_label(annotations: &[&Annotation]) -> LabelResolution {
    let mut groups: BTreeMap<String, (usize, &str)> = BTreeMap::new();
    for a in annotations {
        let e = groups.entry(normalize_label(&a.label)).or_insert((0, a.label.trim()));
        e.0 += 1;
    }
    let Some(top) = groups.values().map(|g| g.0).max() else {
        return LabelResolution::default();
    };
    let mut winners = groups.values().filter(|g| g.0 == top);
    let first = winners.next().expect("max exists");
    if winners.next().is_some() {
        LabelResolution {
            label: None,
            conflict: true,
        }
    } else {
        LabelResolution {
            label: Some(first.1.to_string()),
            conflict: false,
        }
    }
}

/// Attaches resolved labels and annotation history to each summary. Returns
/// topic ids found in the store that no summary covers.
pub fn apply_labels<F: Scalar>(summaries: &mut [TopicSummary<F>], store: &LabelStore) -> Vec<usize> {
    let known: BTreeSet<usize> = summaries.iter().map(|s| s.topic_id).collect();
    for s in summaries.iter_mut() {
        let current = store.current(s.topic_id);
        let r = resolve_label(&current);
        s.label = r.label;
        s.label_conflict = r.conflict;
        s.label_annotations = store
            .annotations()
            .iter()
            .filter(|a| a.topic_id == s.topic_id)
            .cloned()
            .collect();
    }
    store.topics().into_iter().filter(|t| !known.contains(t)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub per_topic: BTreeMap<usize, f64>,
    pub overall: f64,
}

fn pairwise(annotations: &[&Annotation]) -> f64 {
    let labels: Vec<String> = annotations.iter().map(|a| normalize_label(&a.label)).collect();
    let n = labels.len();
    let mut agree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] == labels[j] {
                agree += 1;
            }
        }
    }
    agree as f64 / (n * (n - 1) / 2) as f64
}

/// Fraction of annotator pairs giving the same label, per topic, and the
/// mean over topics. Every evaluated topic needs two or more annotators.
pub fn agreement(store: &LabelStore, topics: &[usize]) -> Result<Agreement> {
    let mut per_topic = BTreeMap::new();
    for &t in topics {
        let current = store.current(t);
        if current.len() < 2 {
            return Err(Error::InsufficientAnnotators(t));
        }
        per_topic.insert(t, pairwise(&current));
    }
    let overall = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.values().sum::<f64>() / per_topic.len() as f64
    };
    Ok(Agreement { per_topic, overall })
}
