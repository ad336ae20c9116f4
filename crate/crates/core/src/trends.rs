//! Per-topic time series over calendar buckets.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lda::Model;
use crate::report;
use crate::scalar::Scalar;
use crate::vocab::Document;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Month,
    Year,
}

impl Granularity {
    /// Start of the UTC calendar bucket containing `ts`.
    pub fn bucket_start(self, ts: DateTime<Utc>) -> DateTime<Utc> {
        let date = ts.date_naive();
        let start = match self {
            Granularity::Day => date,
            Granularity::Month => NaiveDate::from_ymd_opt(date.year(), date.month(), 1).expect("valid month"),
            Granularity::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("valid year"),
        };
        start.and_hms_opt(0, 0, 0).expect("midnight").and_utc()
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Ok(Granularity::Day),
            "month" => Ok(Granularity::Month),
            "year" => Ok(Granularity::Year),
            other => Err(format!("unknown granularity `{other}` (expected day, month or year)")),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Day => "day",
            Granularity::Month => "month",
            Granularity::Year => "year",
        })
    }
}

/// How a document contributes to a topic's bucket mass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendMode {
    /// Sum of theta over the bucket's documents.
    #[default]
    ThetaMass,
    /// One unit to each document's most probable topic (ties to the lower id).
    HardCount,
}

impl FromStr for TrendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta" | "theta-mass" => Ok(TrendMode::ThetaMass),
            "hard" | "hard-count" => Ok(TrendMode::HardCount),
            other => Err(format!(
                "unknown trend mode `{other}` (expected theta-mass or hard-count)"
            )),
        }
    }
}

impl fmt::Display for TrendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendMode::ThetaMass => "theta-mass",
            TrendMode::HardCount => "hard-count",
        })
    }
}

/// Document indices grouped by bucket start.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Buckets {
    pub buckets: BTreeMap<DateTime<Utc>, Vec<usize>>,
    pub untimestamped: usize,
}

pub fn bucket_documents(documents: &[Document], granularity: Granularity) -> Result<Buckets> {
    let mut out = Buckets::default();
    for (i, doc) in documents.iter().enumerate() {
        match doc.timestamp {
            Some(ts) => out.buckets.entry(granularity.bucket_start(ts)).or_default().push(i),
            None => out.untimestamped += 1,
        }
    }
    if !documents.is_empty() && out.buckets.is_empty() {
        return Err(Error::NoTimestampedDocuments);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct TrendPoint<F> {
    pub bucket_start: DateTime<Utc>,
    pub mass: F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct TrendSeries<F> {
    pub topic_id: usize,
    pub granularity: Granularity,
    pub points: Vec<TrendPoint<F>>,
}

/// Series for each requested topic; empty buckets are omitted.
pub fn topic_trend<F: Scalar>(
    model: &Model<F>,
    documents: &[Document],
    granularity: Granularity,
    topics: &[usize],
    mode: TrendMode,
) -> Result<Vec<TrendSeries<F>>> {
    for &t in topics {
        model.check_topic(t)?;
    }
    if documents.len() != model.n_docs() {
        return Err(Error::DimensionMismatch(format!(
            "{} documents given, model was trained on {}",
            documents.len(),
            model.n_docs()
        )));
    }
    let buckets = bucket_documents(documents, granularity)?;
    let theta = model.theta();
    let argmax = |d: usize| -> usize {
        let row = theta.row(d);
        let mut best = 0;
        for k in 1..row.len() {
            if row[k] > row[best] {
                best = k;
            }
        }
        best
    };
    let series = topics
        .iter()
        .map(|&t| TrendSeries {
            topic_id: t,
            granularity,
            points: buckets
                .buckets
                .iter()
                .map(|(&start, docs)| {
                    let mass = match mode {
                        TrendMode::ThetaMass => docs.iter().map(|&d| theta[[d, t]]).sum(),
                        TrendMode::HardCount => F::of_count(docs.iter().filter(|&&d| argmax(d) == t).count()),
                    };
                    TrendPoint {
                        bucket_start: start,
                        mass,
                    }
                })
                .collect(),
        })
        .collect();
    Ok(series)
}

/// Topics ordered by descending PTW, ties by ascending id; at most `n`.
pub fn top_topics_by_ptw<F: Scalar>(model: &Model<F>, n: usize) -> Vec<(usize, F)> {
    let mut ranked = report::rank_by_ptw(report::ptw_all(model).into_iter().enumerate());
    ranked.truncate(n.min(model.n_topics()));
    ranked
}

/// Writes `topic_id,label,bucket_start,mass` rows sorted by topic then bucket.
pub fn write_trends_csv<F: Scalar, W: Write>(
    series: &[TrendSeries<F>],
    label: impl Fn(usize) -> Option<String>,
    writer: W,
) -> Result<()> {
    let mut sorted: Vec<&TrendSeries<F>> = series.iter().collect();
    sorted.sort_by_key(|s| s.topic_id);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["topic_id", "label", "bucket_start", "mass"])?;
    for s in sorted {
        let lbl = label(s.topic_id).unwrap_or_default();
        for p in &s.points {
            w.write_record([
                s.topic_id.to_string(),
                lbl.clone(),
                p.bucket_start.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                p.mass.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
