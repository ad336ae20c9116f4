use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use topicmine::corpus::RecordFormat;
use topicmine::trends::{Granularity, TrendMode};

/// Every option can also be set through a `TOPICMINE_*` environment
/// variable; command-line values win.
#[derive(Debug, Parser)]
#[command(name = "topicmine", version, about = "Topic mining for timestamped comment corpora")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Sampler seed (and planted-corpus seed for `eval` unless overridden).
    #[arg(long, global = true, env = "TOPICMINE_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Stop-word file, one term per line; the built-in English list otherwise.
    #[arg(long, global = true, env = "TOPICMINE_STOPLIST")]
    pub stoplist: Option<PathBuf>,
    /// Apply Porter stemming after stop-word removal.
    #[arg(long, global = true, env = "TOPICMINE_STEM")]
    pub stem: bool,
    /// Drop terms found in fewer documents.
    #[arg(long, global = true, env = "TOPICMINE_MIN_DF", default_value_t = 5)]
    pub min_df: usize,
    /// Drop terms found in more than this share of documents.
    #[arg(long, global = true, env = "TOPICMINE_MAX_DF_RATIO", default_value_t = 0.5)]
    pub max_df_ratio: f64,
    /// Number of topics [train: 100, eval: the planted topic count].
    #[arg(long, global = true, env = "TOPICMINE_TOPICS")]
    pub topics: Option<usize>,
    /// Document-topic Dirichlet prior.
    #[arg(long, global = true, env = "TOPICMINE_ALPHA", default_value_t = 0.05)]
    pub alpha: f64,
    /// Topic-word Dirichlet prior.
    #[arg(long, global = true, env = "TOPICMINE_BETA", default_value_t = 0.01)]
    pub beta: f64,
    /// Gibbs sweeps [train: 1000, eval: 500].
    #[arg(long, global = true, env = "TOPICMINE_ITERATIONS")]
    pub iterations: Option<usize>,
    /// Corpus record format; guessed from the file extension when absent.
    #[arg(long, global = true, env = "TOPICMINE_FORMAT")]
    pub format: Option<RecordFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write the snapshot, vocabulary and run manifest.
    Train(TrainArgs),
    /// Export topics ranked by PTW as CSV.
    Topics(TopicsArgs),
    /// Export per-topic time series as CSV.
    Trends(TrendsArgs),
    /// Export word-cloud weights for one topic as JSON.
    Cloud(CloudArgs),
    /// Manage the topic label store.
    #[command(subcommand)]
    Labels(LabelsCommand),
    /// Score recovery of planted topics on a synthetic corpus.
    Eval(EvalArgs),
    /// Serve a snapshot and label store over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Comment corpus (JSONL or CSV).
    pub corpus: PathBuf,
    /// Directory for model.json, vocab.tsv and manifest.json.
    #[arg(long, short, env = "TOPICMINE_OUT_DIR", default_value = "topicmine-run")]
    pub out_dir: PathBuf,
    /// Terms per topic recorded for downstream reports.
    #[arg(long, env = "TOPICMINE_TERMS", default_value_t = 20)]
    pub terms: usize,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    pub snapshot: PathBuf,
    #[arg(long, env = "TOPICMINE_TERMS", default_value_t = 20)]
    pub terms: usize,
    /// Number of top-ranked topics to export.
    #[arg(long, env = "TOPICMINE_LIMIT", default_value_t = 20)]
    pub limit: usize,
    /// Label store whose resolved labels fill the label column.
    #[arg(long, env = "TOPICMINE_LABELS")]
    pub labels: Option<PathBuf>,
    /// Output file; standard output otherwise.
    #[arg(long, short, env = "TOPICMINE_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrendsArgs {
    pub snapshot: PathBuf,
    #[arg(long, env = "TOPICMINE_GRANULARITY", default_value_t = Granularity::Month)]
    pub granularity: Granularity,
    #[arg(long, env = "TOPICMINE_MODE", default_value_t = TrendMode::ThetaMass)]
    pub mode: TrendMode,
    /// Topic to include (repeatable); the `--limit` top topics by PTW otherwise.
    #[arg(long = "topic")]
    pub topic: Vec<usize>,
    #[arg(long, env = "TOPICMINE_LIMIT", default_value_t = 20)]
    pub limit: usize,
    #[arg(long, env = "TOPICMINE_LABELS")]
    pub labels: Option<PathBuf>,
    #[arg(long, short, env = "TOPICMINE_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    pub snapshot: PathBuf,
    #[arg(long, env = "TOPICMINE_TOPIC")]
    pub topic: usize,
    #[arg(long, env = "TOPICMINE_TERMS", default_value_t = 20)]
    pub terms: usize,
    #[arg(long, short, env = "TOPICMINE_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LabelsCommand {
    /// Append annotations from a JSON list or a CSV file to the store.
    Import {
        input: PathBuf,
        #[arg(long, env = "TOPICMINE_LABELS", default_value = "labels.json")]
        store: PathBuf,
    },
    /// Write the full annotation history as JSON, or CSV for a `.csv` path.
    Export {
        #[arg(long, env = "TOPICMINE_LABELS", default_value = "labels.json")]
        store: PathBuf,
        #[arg(long, short, env = "TOPICMINE_OUT")]
        out: Option<PathBuf>,
    },
    /// Pairwise agreement per topic and overall.
    Agreement {
        #[arg(long, env = "TOPICMINE_LABELS", default_value = "labels.json")]
        store: PathBuf,
        /// Topic to evaluate (repeatable); every topic with two or more
        /// annotators otherwise.
        #[arg(long = "topic")]
        topic: Vec<usize>,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, env = "TOPICMINE_TRUE_TOPICS", default_value_t = 5)]
    pub true_topics: usize,
    #[arg(long, env = "TOPICMINE_VOCAB_SIZE", default_value_t = 200)]
    pub vocab_size: usize,
    #[arg(long, env = "TOPICMINE_DOCS", default_value_t = 1000)]
    pub docs: usize,
    /// Mean of the Poisson document length.
    #[arg(long, env = "TOPICMINE_DOC_LENGTH", default_value_t = 50.0)]
    pub doc_length: f64,
    /// Use exactly `--doc-length` tokens per document.
    #[arg(long, env = "TOPICMINE_FIXED_LENGTH")]
    pub fixed_length: bool,
    #[arg(long, env = "TOPICMINE_ALPHA_GEN", default_value_t = 0.1)]
    pub alpha_gen: f64,
    /// Share of each planted topic's mass on its own word block.
    #[arg(long, env = "TOPICMINE_OWN_MASS", default_value_t = 0.8)]
    pub own_mass: f64,
    /// Seed of the planted corpus; `--seed` otherwise.
    #[arg(long, env = "TOPICMINE_SPEC_SEED")]
    pub spec_seed: Option<u64>,
    /// Minimum mean matched cosine for success.
    #[arg(long, env = "TOPICMINE_THRESHOLD", default_value_t = 0.85)]
    pub threshold: f64,
    #[arg(long, env = "TOPICMINE_PERPLEXITY_EVERY", default_value_t = 50)]
    pub perplexity_every: usize,
    #[arg(long, short, env = "TOPICMINE_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub snapshot: PathBuf,
    #[arg(long, env = "TOPICMINE_LABELS", default_value = "labels.json")]
    pub labels: PathBuf,
    #[arg(long, env = "TOPICMINE_BIND", default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    #[arg(long, env = "TOPICMINE_READ_ONLY")]
    pub read_only: bool,
    /// Directory of static UI files served at `/`.
    #[arg(long, env = "TOPICMINE_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}
