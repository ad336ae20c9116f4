//! Comment ingestion: parsing, validation and deduplication of raw records.
//!
//! Two on-disk formats are accepted. JSONL carries one object per line with
//! `id`, `user_id`, optional `timestamp` and `text`. CSV uses the header
//! `id,user_id,timestamp,text` with RFC-4180 quoting. Records that fail to
//! parse are counted and skipped, never fatal.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub user_id: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub text: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_records: usize,
    pub unique_comments: usize,
    pub dropped_duplicates: usize,
    pub dropped_invalid: usize,
    pub time_range: Option<(DateTime<Utc>, DateTime<Utc>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl RecordFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => RecordFormat::Csv,
            _ => RecordFormat::Jsonl,
        }
    }
}

impl FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(RecordFormat::Jsonl),
            "csv" => Ok(RecordFormat::Csv),
            other => Err(format!("unknown record format `{other}` (expected jsonl or csv)")),
        }
    }
}

impl fmt::Display for RecordFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordFormat::Jsonl => "jsonl",
            RecordFormat::Csv => "csv",
        })
    }
}

/// Why a single record was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidRecord(pub String);

impl fmt::Display for InvalidRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid record: {}", self.0)
    }
}

impl std::error::Error for InvalidRecord {}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    user_id: Option<serde_json::Value>,
    timestamp: Option<String>,
    text: Option<String>,
}

fn field_string(value: Option<serde_json::Value>) -> Option<String> {
    match value? {
        serde_json::Value::String(s) => Some(s),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses an ISO-8601 instant. Offsets are converted to UTC; values without
/// an offset (including bare dates) are taken to be UTC already.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

fn build_comment(
    id: Option<String>,
    user_id: Option<String>,
    timestamp: Option<String>,
    text: Option<String>,
) -> Result<Comment, InvalidRecord> {
    let id = id
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| InvalidRecord("missing id".into()))?;
    let user_id = user_id.ok_or_else(|| InvalidRecord("missing user_id".into()))?;
    let text = text.ok_or_else(|| InvalidRecord("missing text".into()))?;
    if text.trim().is_empty() {
        return Err(InvalidRecord("empty text".into()));
    }
    let timestamp = match timestamp.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(raw) => Some(parse_timestamp(raw).ok_or_else(|| InvalidRecord(format!("malformed timestamp `{raw}`")))?),
    };
    Ok(Comment {
        id,
        user_id,
        timestamp,
        text,
    })
}

/// Parses one serialized record. For CSV the line holds the four fields in
/// header order (`id,user_id,timestamp,text`) without the header itself.
pub fn parse_comment_record(line: &str, format: RecordFormat) -> Result<Comment, InvalidRecord> {
    match format {
        RecordFormat::Jsonl => {
            let raw: RawRecord =
                serde_json::from_str(line).map_err(|e| InvalidRecord(format!("malformed json: {e}")))?;
            build_comment(field_string(raw.id), field_string(raw.user_id), raw.timestamp, raw.text)
        }
        RecordFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .from_reader(line.as_bytes());
            let record = reader
                .records()
                .next()
                .ok_or_else(|| InvalidRecord("empty line".into()))?
                .map_err(|e| InvalidRecord(format!("malformed csv: {e}")))?;
            if record.len() != 4 {
                return Err(InvalidRecord(format!("expected 4 csv fields, found {}", record.len())));
            }
            let get = |i: usize| record.get(i).map(str::to_string);
            build_comment(get(0), get(1), get(2), get(3))
        }
    }
}

fn dedup_key(text: &str) -> String {
    text.nfc().collect()
}

/// Accumulates records into a deduplicated corpus, first occurrence wins.
#[derive(Default)]
struct CorpusBuilder {
    comments: Vec<Comment>,
    seen_text: HashSet<String>,
    seen_ids: HashSet<String>,
    stats: CorpusStats,
}

impl CorpusBuilder {
    fn push(&mut self, parsed: Result<Comment, InvalidRecord>) {
        self.stats.total_records += 1;
        let comment = match parsed {
            Ok(c) => c,
            Err(_) => {
                self.stats.dropped_invalid += 1;
                return;
            }
        };
        let key = dedup_key(&comment.text);
        // An id collision with different text is also treated as a duplicate
        // so ids stay unique.
        if self.seen_text.contains(&key) || self.seen_ids.contains(&comment.id) {
            self.stats.dropped_duplicates += 1;
            return;
        }
        self.seen_text.insert(key);
        self.seen_ids.insert(comment.id.clone());
        if let Some(ts) = comment.timestamp {
            self.stats.time_range = Some(match self.stats.time_range {
                None => (ts, ts),
                Some((lo, hi)) => (lo.min(ts), hi.max(ts)),
            });
        }
        self.stats.unique_comments += 1;
        self.comments.push(comment);
    }

    fn finish(self) -> (Vec<Comment>, CorpusStats) {
        (self.comments, self.stats)
    }
}

/// Reads comments from any reader in the given format.
pub fn read_corpus<R: Read>(reader: R, format: RecordFormat) -> std::io::Result<(Vec<Comment>, CorpusStats)> {
    let mut builder = CorpusBuilder::default();
    match format {
        RecordFormat::Jsonl => {
            for line in BufReader::new(reader).split(b'\n') {
                let line = line?;
                let parsed = match std::str::from_utf8(&line) {
                    Ok(s) if s.trim().is_empty() => continue,
                    Ok(s) => parse_comment_record(s, format),
                    Err(_) => Err(InvalidRecord("malformed utf-8".into())),
                };
                builder.push(parsed);
            }
        }
        RecordFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(reader);
            let headers = reader
                .byte_headers()
                .map_err(csv_io)?
                .iter()
                .map(|h| String::from_utf8_lossy(h).trim().to_ascii_lowercase())
                .collect::<Vec<_>>();
            let column = |name: &str| headers.iter().position(|h| h == name);
            let (id_col, user_col, ts_col, text_col) =
                (column("id"), column("user_id"), column("timestamp"), column("text"));
            for record in reader.byte_records() {
                let record = match record {
                    Ok(r) => r,
                    Err(e) if e.is_io_error() => return Err(csv_io(e)),
                    Err(e) => {
                        builder.push(Err(InvalidRecord(format!("malformed csv: {e}"))));
                        continue;
                    }
                };
                let field = |col: Option<usize>| -> Result<Option<String>, InvalidRecord> {
                    match col.and_then(|c| record.get(c)) {
                        None => Ok(None),
                        Some(bytes) => std::str::from_utf8(bytes)
                            .map(|s| Some(s.to_string()))
                            .map_err(|_| InvalidRecord("malformed utf-8".into())),
                    }
                };
                let parsed = (|| build_comment(field(id_col)?, field(user_col)?, field(ts_col)?, field(text_col)?))();
                builder.push(parsed);
            }
        }
    }
    Ok(builder.finish())
}

fn csv_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    }
}

/// Loads and deduplicates a corpus file.
pub fn load_corpus(path: impl AsRef<Path>, format: RecordFormat) -> Result<(Vec<Comment>, CorpusStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file, format).map_err(|e| Error::io(path, e))
}
