#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{TimeZone, Utc};
use ndarray::Array2;
use topicmine::corpus::Comment;
use topicmine::eval::{generate_synthetic_corpus, DocLength, SyntheticCorpus, SyntheticSpec};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_topicmine"));
    for (key, _) in std::env::vars() {
        if key.starts_with("TOPICMINE_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

pub fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn topicmine")
}

pub fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "topicmine {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Planted corpus with documents spread over the months of 2018 and 2019.
pub fn dated_corpus(docs: usize, len: usize, seed: u64) -> SyntheticCorpus {
    let spec = SyntheticSpec {
        docs,
        doc_length: DocLength::Fixed(len),
        seed,
        ..SyntheticSpec::default()
    };
    let mut corpus = generate_synthetic_corpus(&spec).unwrap();
    for (d, doc) in corpus.documents.iter_mut().enumerate() {
        let year = 2018 + (d % 2) as i32;
        let month = 1 + (d / 2 % 12) as u32;
        doc.timestamp = Some(Utc.with_ymd_and_hms(year, month, 1 + (d % 27) as u32, 9, 0, 0).unwrap());
    }
    corpus
}

pub fn write_jsonl(path: &Path, comments: &[Comment]) {
    let mut f = std::fs::File::create(path).unwrap();
    for c in comments {
        writeln!(f, "{}", serde_json::to_string(c).unwrap()).unwrap();
    }
}

/// Writes a dated planted corpus to `dir/corpus.jsonl`.
pub fn corpus_file(dir: &Path, docs: usize, len: usize, seed: u64) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    write_jsonl(&path, &dated_corpus(docs, len, seed).to_comments());
    path
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Greedy one-to-one matching by descending cosine. Returns, for each true
/// row, the matched recovered row and its cosine.
pub fn greedy_match(recovered: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let mut scores = Vec::new();
    for (r, rr) in recovered.iter().enumerate() {
        for (t, tr) in truth.iter().enumerate() {
            scores.push((cosine(rr, tr), r, t));
        }
    }
    scores.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut used_r = vec![false; recovered.len()];
    let mut out = vec![(usize::MAX, f64::NAN); truth.len()];
    for (c, r, t) in scores {
        if !used_r[r] && out[t].0 == usize::MAX {
            used_r[r] = true;
            out[t] = (r, c);
        }
    }
    out
}

pub fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}
