use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use topicmine::corpus::{CorpusStats, RecordFormat};
use topicmine::pipeline::VocabConfig;
use topicmine::textnorm::NormConfig;
use topicmine::LdaConfig;

use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<InputDigest, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

fn config_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("config serializes"))
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct NormSettings {
    /// `builtin:english` or the stop-list path.
    pub stoplist: String,
    pub stoplist_terms: usize,
    pub stem: bool,
    pub min_token_len: usize,
    pub max_token_len: usize,
    pub drop_numeric: bool,
}

impl NormSettings {
    pub fn new(norm: &NormConfig, stoplist: Option<&Path>) -> Self {
        NormSettings {
            stoplist: stoplist.map_or_else(|| "builtin:english".to_string(), |p| p.display().to_string()),
            stoplist_terms: norm.stoplist.len(),
            stem: norm.stemming_enabled,
            min_token_len: norm.min_token_len,
            max_token_len: norm.max_token_len,
            drop_numeric: norm.drop_numeric,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VocabSettings {
    pub min_df: usize,
    pub max_df_ratio: f64,
}

impl From<VocabConfig> for VocabSettings {
    fn from(v: VocabConfig) -> Self {
        VocabSettings {
            min_df: v.min_df,
            max_df_ratio: v.max_df_ratio,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub format: RecordFormat,
    pub norm: NormSettings,
    pub vocab: VocabSettings,
    pub lda: LdaConfig,
    pub terms_per_topic: usize,
}

#[derive(Debug, Serialize)]
pub struct ConfigHashes {
    /// Covers the full stop list, not only its path.
    pub norm: String,
    pub vocab: String,
    pub lda: String,
}

impl ConfigHashes {
    pub fn new(norm: &NormConfig, vocab: &VocabSettings, lda: &LdaConfig) -> Self {
        ConfigHashes {
            norm: config_hash(norm),
            vocab: config_hash(vocab),
            lda: config_hash(lda),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Outputs {
    pub snapshot: PathBuf,
    pub vocabulary: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct DataSummary {
    #[serde(flatten)]
    pub stats: CorpusStats,
    pub documents: usize,
    pub dropped_empty: usize,
    pub vocabulary_size: usize,
    pub tokens: u64,
}

#[derive(Debug, Serialize)]
pub struct StageTime {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: RunConfig,
    pub config_hashes: ConfigHashes,
    pub inputs: Vec<InputDigest>,
    pub outputs: Outputs,
    pub data: DataSummary,
    pub final_log_likelihood: f64,
    pub stages: Vec<StageTime>,
}

/// Wall-clock per named stage.
#[derive(Default)]
pub struct Stopwatch {
    pub stages: Vec<StageTime>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageTime {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}
