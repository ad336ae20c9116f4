use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::Deserialize;
use topicmine::corpus::{load_corpus, parse_timestamp, RecordFormat};
use topicmine::eval::{run_planted_recovery, DocLength, PlantedPhi, SyntheticSpec};
use topicmine::lda::{read_snapshot, train_with_progress, write_snapshot};
use topicmine::pipeline::{prepare_documents, VocabConfig};
use topicmine::report::{
    agreement, apply_labels, resolve_label, summarize, wordcloud_weights, write_topics_csv, Annotation, LabelStore,
};
use topicmine::textnorm::{NormConfig, Stoplist};
use topicmine::trends::{top_topics_by_ptw, topic_trend, write_trends_csv};
use topicmine::{LdaConfig, LdaModel, TopicSummary};

use crate::args::{
    Cli, CloudArgs, Command, EvalArgs, GlobalArgs, LabelsCommand, ServeArgs, TopicsArgs, TrainArgs, TrendsArgs,
};
use crate::manifest::{
    file_digest, ConfigHashes, DataSummary, NormSettings, Outputs, RunConfig, RunManifest, Stopwatch, VocabSettings,
};
use crate::Failure;

const PROGRESS_EVERY: usize = 50;

pub fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Train(a) => train(g, a),
        Command::Topics(a) => topics(a),
        Command::Trends(a) => trends(a),
        Command::Cloud(a) => cloud(a),
        Command::Labels(c) => labels(c),
        Command::Eval(a) => eval(g, a),
        Command::Serve(a) => serve(a),
    }
}

/// Runs `f` against the output file, or standard output when `out` is None.
fn with_output<T>(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<T, Failure>) -> Result<T, Failure> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::io(path, e))?;
            let mut w = BufWriter::new(file);
            let v = f(&mut w)?;
            w.flush().map_err(|e| Failure::io(path, e))?;
            Ok(v)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let v = f(&mut w)?;
            w.flush().map_err(|e| Failure::runtime(e.to_string()))?;
            Ok(v)
        }
    }
}

fn load_model(path: &Path) -> Result<LdaModel, Failure> {
    if !path.exists() {
        return Err(Failure::usage(format!("{}: no such snapshot", path.display())));
    }
    Ok(read_snapshot(path)?)
}

fn load_labels(path: Option<&Path>) -> Result<LabelStore, Failure> {
    match path {
        Some(p) => Ok(LabelStore::load(p)?),
        None => Ok(LabelStore::new()),
    }
}

fn lda_config(g: &GlobalArgs, default_topics: usize, default_iterations: usize) -> LdaConfig {
    LdaConfig {
        topics: g.topics.unwrap_or(default_topics),
        alpha: g.alpha,
        beta: g.beta,
        iterations: g.iterations.unwrap_or(default_iterations),
        seed: g.seed,
    }
}

fn train(g: &GlobalArgs, a: TrainArgs) -> Result<(), Failure> {
    if !a.corpus.is_file() {
        return Err(Failure::usage(format!("{}: corpus file not found", a.corpus.display())));
    }
    if a.terms == 0 {
        return Err(Failure::usage("--terms must be at least 1"));
    }
    let format = g.format.unwrap_or_else(|| RecordFormat::from_path(&a.corpus));
    let stoplist = match &g.stoplist {
        Some(p) => Stoplist::load(p)?,
        None => Stoplist::english(),
    };
    let norm = NormConfig {
        stoplist,
        stemming_enabled: g.stem,
        ..NormConfig::default()
    };
    let vocab_cfg = VocabConfig {
        min_df: g.min_df,
        max_df_ratio: g.max_df_ratio,
    };
    let lda = lda_config(g, 100, 1000);
    lda.validate()?;
    norm.validate()?;

    let mut inputs = vec![file_digest(&a.corpus)?];
    if let Some(p) = &g.stoplist {
        inputs.push(file_digest(p)?);
    }

    let mut clock = Stopwatch::default();
    let (comments, stats) = clock.time("ingest", || load_corpus(&a.corpus, format))?;
    let prepared = clock.time("preprocess", || prepare_documents(&comments, &norm, vocab_cfg))?;
    let tokens: u64 = prepared.documents.iter().map(|d| d.word_ids.len() as u64).sum();
    println!(
        "records {}, unique {}, duplicates {}, invalid {}",
        stats.total_records, stats.unique_comments, stats.dropped_duplicates, stats.dropped_invalid
    );
    println!(
        "documents {} ({} empty after normalization), vocabulary {}, tokens {}",
        prepared.documents.len(),
        prepared.dropped.len(),
        prepared.vocabulary.len(),
        tokens
    );
    let data = DataSummary {
        stats,
        documents: prepared.documents.len(),
        dropped_empty: prepared.dropped.len(),
        vocabulary_size: prepared.vocabulary.len(),
        tokens,
    };

    let iterations = lda.iterations;
    let model = clock.time("train", || {
        train_with_progress(prepared.documents, prepared.vocabulary, lda.clone(), |it, ll| {
            if it % PROGRESS_EVERY == 0 || it == iterations {
                eprintln!("sweep {it}/{iterations} log-likelihood {ll:.4}");
            }
        })
    })?;
    let final_ll = *model.log_likelihood_trace().last().expect("at least one sweep");
    println!("final log-likelihood {final_ll:.4}");

    std::fs::create_dir_all(&a.out_dir).map_err(|e| Failure::io(&a.out_dir, e))?;
    let outputs = Outputs {
        snapshot: a.out_dir.join("model.json"),
        vocabulary: a.out_dir.join("vocab.tsv"),
        manifest: a.out_dir.join("manifest.json"),
    };
    clock.time("write", || -> Result<(), Failure> {
        write_snapshot(&model, &outputs.snapshot)?;
        model.vocabulary().write_tsv(&outputs.vocabulary)?;
        Ok(())
    })?;

    let vocab = VocabSettings::from(vocab_cfg);
    let manifest = RunManifest {
        tool: "topicmine",
        version: env!("CARGO_PKG_VERSION"),
        command: "train",
        seed: lda.seed,
        config_hashes: ConfigHashes::new(&norm, &vocab, &lda),
        config: RunConfig {
            format,
            norm: NormSettings::new(&norm, g.stoplist.as_deref()),
            vocab,
            lda,
            terms_per_topic: a.terms,
        },
        inputs,
        outputs,
        data,
        final_log_likelihood: final_ll,
        stages: clock.stages,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::runtime(e.to_string()))?;
    let path = &manifest.outputs.manifest;
    std::fs::write(path, text + "\n").map_err(|e| Failure::io(path, e))?;
    println!("wrote {}", a.out_dir.display());
    Ok(())
}

fn labeled_summaries(model: &LdaModel, labels: Option<&Path>, terms: usize) -> Result<Vec<TopicSummary>, Failure> {
    let store = load_labels(labels)?;
    let mut summaries = summarize(model, terms);
    let unknown = apply_labels(&mut summaries, &store);
    if !unknown.is_empty() {
        eprintln!("warning: label store mentions unknown topics {unknown:?}");
    }
    Ok(summaries)
}

/// Prints the ranked table in blocks of ten ranks.
fn print_rank_blocks(summaries: &[TopicSummary]) {
    for (b, block) in summaries.chunks(10).enumerate() {
        let first = b * 10 + 1;
        eprintln!("ranks {}-{}", first, first + block.len() - 1);
        for (i, s) in block.iter().enumerate() {
            let terms: Vec<&str> = s.top_terms.iter().map(|t| t.term.as_str()).collect();
            eprintln!(
                "{:>4}  topic {:>3}  PTW {:>8.5}  {:<20}  {}",
                first + i,
                s.topic_id,
                s.ptw,
                s.label.as_deref().unwrap_or("-"),
                terms.join(" ")
            );
        }
    }
}

fn topics(a: TopicsArgs) -> Result<(), Failure> {
    if a.terms == 0 {
        return Err(Failure::usage("--terms must be at least 1"));
    }
    let model = load_model(&a.snapshot)?;
    let mut summaries = labeled_summaries(&model, a.labels.as_deref(), a.terms)?;
    summaries.truncate(a.limit);
    with_output(a.out.as_deref(), |w| Ok(write_topics_csv(&summaries, a.terms, w)?))?;
    print_rank_blocks(&summaries);
    Ok(())
}

fn trends(a: TrendsArgs) -> Result<(), Failure> {
    let model = load_model(&a.snapshot)?;
    let topic_ids: Vec<usize> = if a.topic.is_empty() {
        top_topics_by_ptw(&model, a.limit).into_iter().map(|t| t.0).collect()
    } else {
        a.topic.clone()
    };
    let series = topic_trend(&model, model.documents(), a.granularity, &topic_ids, a.mode)?;
    let store = load_labels(a.labels.as_deref())?;
    let label = |t: usize| resolve_label(&store.current(t)).label;
    with_output(a.out.as_deref(), |w| Ok(write_trends_csv(&series, label, w)?))
}

fn cloud(a: CloudArgs) -> Result<(), Failure> {
    if a.terms == 0 {
        return Err(Failure::usage("--terms must be at least 1"));
    }
    let model = load_model(&a.snapshot)?;
    let cloud = wordcloud_weights(&model, a.topic, a.terms)?;
    with_output(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &cloud).map_err(|e| Failure::runtime(e.to_string()))?;
        writeln!(w).map_err(|e| Failure::runtime(e.to_string()))
    })
}

#[derive(Deserialize)]
struct CsvAnnotation {
    topic_id: usize,
    annotator_id: String,
    label: String,
    #[serde(default)]
    timestamp: Option<String>,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_annotations(path: &PathBuf) -> Result<Vec<Annotation>, Failure> {
    if !path.is_file() {
        return Err(Failure::usage(format!("{}: annotation file not found", path.display())));
    }
    let bad = |m: String| Failure::usage(format!("{}: {m}", path.display()));
    let annotations = if is_csv(path) {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
        let mut out = Vec::new();
        for row in rdr.deserialize::<CsvAnnotation>() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            let timestamp = match row.timestamp.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
                Some(raw) => parse_timestamp(raw).ok_or_else(|| bad(format!("bad timestamp `{raw}`")))?,
                None => Utc::now(),
            };
            out.push(Annotation {
                topic_id: row.topic_id,
                annotator_id: row.annotator_id,
                label: row.label,
                timestamp,
            });
        }
        out
    } else {
        let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?
    };
    for a in &annotations {
        if a.label.trim().is_empty() || a.annotator_id.trim().is_empty() {
            return Err(bad(format!("empty label or annotator for topic {}", a.topic_id)));
        }
    }
    Ok(annotations)
}

fn labels(c: LabelsCommand) -> Result<(), Failure> {
    match c {
        LabelsCommand::Import { input, store } => {
            let new = read_annotations(&input)?;
            let mut s = LabelStore::load(&store)?;
            let n = new.len();
            for a in new {
                s.push(a);
            }
            s.save(&store)?;
            println!("imported {n} annotations into {} ({} total)", store.display(), s.len());
            Ok(())
        }
        LabelsCommand::Export { store, out } => {
            let s = LabelStore::load(&store)?;
            let csv_out = out.as_deref().is_some_and(is_csv);
            with_output(out.as_deref(), |w| {
                if csv_out {
                    let mut cw = csv::Writer::from_writer(w);
                    for a in s.annotations() {
                        cw.serialize(a).map_err(|e| Failure::runtime(e.to_string()))?;
                    }
                    cw.flush().map_err(|e| Failure::runtime(e.to_string()))
                } else {
                    serde_json::to_writer_pretty(&mut *w, s.annotations())
                        .map_err(|e| Failure::runtime(e.to_string()))?;
                    writeln!(w).map_err(|e| Failure::runtime(e.to_string()))
                }
            })
        }
        LabelsCommand::Agreement { store, topic } => {
            let s = LabelStore::load(&store)?;
            let topics: Vec<usize> = if topic.is_empty() {
                s.topics().into_iter().filter(|&t| s.current(t).len() >= 2).collect()
            } else {
                topic
            };
            if topics.is_empty() {
                return Err(Failure::usage("no topic has two or more annotators"));
            }
            let a = agreement(&s, &topics)?;
            let text = serde_json::to_string_pretty(&a).map_err(|e| Failure::runtime(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn eval(g: &GlobalArgs, a: EvalArgs) -> Result<(), Failure> {
    let doc_length = if a.fixed_length {
        if a.doc_length < 1.0 || a.doc_length.fract() != 0.0 {
            return Err(Failure::usage(
                "--doc-length must be a positive integer with --fixed-length",
            ));
        }
        DocLength::Fixed(a.doc_length as usize)
    } else {
        DocLength::Poisson(a.doc_length)
    };
    let spec = SyntheticSpec {
        topics: a.true_topics,
        vocab_size: a.vocab_size,
        docs: a.docs,
        doc_length,
        alpha_gen: a.alpha_gen,
        planted: PlantedPhi::Block { own_mass: a.own_mass },
        seed: a.spec_seed.unwrap_or(g.seed),
    };
    let cfg = lda_config(g, a.true_topics, 500);
    let report = run_planted_recovery(&spec, cfg, a.perplexity_every, a.threshold)?;
    with_output(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(|e| Failure::runtime(e.to_string()))?;
        writeln!(w).map_err(|e| Failure::runtime(e.to_string()))
    })?;
    let verdict = if report.passed { "pass" } else { "FAIL" };
    eprintln!(
        "mean matched cosine {:.4} (threshold {}), perplexity {:.3} -> {:.3}: {verdict}",
        report.mean_cosine, report.threshold, report.perplexity.first, report.perplexity.last
    );
    if report.passed {
        Ok(())
    } else {
        Err(Failure::runtime(format!(
            "planted recovery below threshold: {:.4} < {}",
            report.mean_cosine, report.threshold
        )))
    }
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    if !a.snapshot.is_file() {
        return Err(Failure::usage(format!("{}: no such snapshot", a.snapshot.display())));
    }
    let config = topicmine_serve::ServeConfig {
        snapshot: a.snapshot,
        labels: a.labels,
        bind: a.bind,
        read_only: a.read_only,
        static_dir: a.static_dir,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::runtime(e.to_string()))?;
    rt.block_on(async {
        let server = topicmine_serve::Server::bind(&config).await?;
        let addr = server.local_addr().map_err(|e| Failure::runtime(e.to_string()))?;
        println!("listening on http://{addr}");
        std::io::stdout().flush().ok();
        server.serve().await?;
        Ok(())
    })
}
