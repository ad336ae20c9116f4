//! Versioned JSON container for trained models.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use super::sampler::LdaConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vocab::{Document, Vocabulary};

pub const SNAPSHOT_FORMAT: &str = "topicmine-model";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Dimensions {
    documents: usize,
    topics: usize,
    vocabulary: usize,
}

#[derive(Serialize, Deserialize)]
struct StoredCounts {
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_totals: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
struct SnapshotFile<F> {
    format: String,
    version: u32,
    config: LdaConfig<F>,
    dimensions: Dimensions,
    vocabulary: Vocabulary,
    documents: Vec<Document>,
    assignments: Vec<Vec<usize>>,
    counts: StoredCounts,
    log_likelihood_trace: Vec<F>,
}

fn stored_counts<F: Scalar>(model: &Model<F>) -> StoredCounts {
    let c = model.counts();
    StoredCounts {
        doc_topic: (0..c.n_docs()).map(|d| c.doc_topic_row(d).to_vec()).collect(),
        topic_word: (0..c.n_topics())
            .map(|k| (0..c.vocab_size()).map(|w| c.topic_word(k, w)).collect())
            .collect(),
        topic_totals: c.topic_totals().to_vec(),
    }
}

pub fn write_snapshot_to<F: Scalar, W: Write>(model: &Model<F>, writer: W) -> Result<()> {
    let file = SnapshotFile {
        format: SNAPSHOT_FORMAT.to_string(),
        version: SNAPSHOT_VERSION,
        config: model.config().clone(),
        dimensions: Dimensions {
            documents: model.n_docs(),
            topics: model.n_topics(),
            vocabulary: model.vocab_size(),
        },
        vocabulary: model.vocabulary().clone(),
        documents: model.documents().to_vec(),
        assignments: model.assignments().to_vec(),
        counts: stored_counts(model),
        log_likelihood_trace: model.log_likelihood_trace().to_vec(),
    };
    serde_json::to_writer(writer, &file)?;
    Ok(())
}

pub fn write_snapshot<F: Scalar>(model: &Model<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_snapshot_to(model, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_snapshot_from<F: Scalar, R: Read>(reader: R) -> Result<Model<F>> {
    let file: SnapshotFile<F> = serde_json::from_reader(reader)?;
    if file.format != SNAPSHOT_FORMAT {
        return Err(Error::Snapshot(format!("unexpected format tag `{}`", file.format)));
    }
    if file.version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {}", file.version)));
    }
    let vocabulary = file.vocabulary.reindex()?;
    let dims = &file.dimensions;
    if dims.documents != file.documents.len()
        || dims.topics != file.config.topics
        || dims.vocabulary != vocabulary.len()
    {
        return Err(Error::Snapshot("dimensions disagree with contents".into()));
    }
    let model = Model::from_assignments(
        file.config,
        vocabulary,
        file.documents,
        &file.assignments,
        file.log_likelihood_trace,
    )?;
    let recomputed = stored_counts(&model);
    if recomputed.doc_topic != file.counts.doc_topic
        || recomputed.topic_word != file.counts.topic_word
        || recomputed.topic_totals != file.counts.topic_totals
    {
        return Err(Error::Snapshot("stored counts disagree with assignments".into()));
    }
    Ok(model)
}

pub fn read_snapshot<F: Scalar>(path: impl AsRef<Path>) -> Result<Model<F>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot_from(BufReader::new(f))
}
