//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{Datelike, TimeZone, Utc};
use topicmine::eval::{generate_synthetic_corpus, DocLength, SyntheticSpec};
use topicmine::lda::{train, Model};
use topicmine::report::{agreement, ptw_all, rank_by_ptw, write_topics_csv, Annotation, LabelStore};
use topicmine::trends::{topic_trend, Granularity, TrendMode};
use topicmine::vocab::Document;
use topicmine::{LdaConfig, Sampler, TopicSummary};

use common::{corpus_file, greedy_match, rows, run_ok};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn default_parameters() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path(), 120, 20, 3);
    run_ok(&["train", corpus.to_str().unwrap(), "--out-dir", "run"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap();
    for needle in [
        "\"topics\": 100,",
        "\"alpha\": 0.05,",
        "\"beta\": 0.01,",
        "\"iterations\": 1000,",
        "\"terms_per_topic\": 20",
    ] {
        ensure(text.contains(needle), || format!("manifest lacks `{needle}`"))?;
    }
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    let lda = &m["config"]["lda"];
    ensure(
        lda["topics"] == 100 && lda["alpha"] == 0.05 && lda["beta"] == 0.01 && lda["iterations"] == 1000,
        || format!("manifest lda config {lda}"),
    )?;
    ensure(m["config"]["terms_per_topic"] == 20, || "terms_per_topic".into())?;
    Ok("manifest records K=100 alpha=0.05 beta=0.01 iterations=1000 terms=20".into())
}

/// Recounts every table from the raw assignments.
fn recount_matches(s: &Sampler, v: usize, k: usize) -> Result<u64, String> {
    let c = s.state().counts();
    let mut nkw = vec![0u32; k * v];
    let mut nk = vec![0u32; k];
    let mut total = 0u64;
    for d in 0..s.state().n_docs() {
        let mut ndk = vec![0u32; k];
        for (&w, &z) in s.state().doc_words(d).iter().zip(s.state().doc_topics(d)) {
            ndk[z as usize] += 1;
            nkw[z as usize * v + w as usize] += 1;
            nk[z as usize] += 1;
            total += 1;
        }
        ensure(ndk == c.doc_topic_row(d), || format!("doc-topic row {d} differs"))?;
        ensure(ndk.iter().sum::<u32>() == c.doc_len(d), || format!("doc {d} length"))?;
    }
    for t in 0..k {
        for w in 0..v {
            ensure(nkw[t * v + w] == c.topic_word(t, w), || {
                format!("topic-word ({t},{w}) differs")
            })?;
        }
    }
    ensure(nk == c.topic_totals(), || "topic totals differ".into())?;
    ensure(total == c.total_tokens(), || "total tokens differ".into())?;
    c.check_invariants()?;
    Ok(total)
}

fn count_conservation() -> Outcome {
    let start = Instant::now();
    let spec = SyntheticSpec {
        docs: 50,
        doc_length: DocLength::Fixed(20),
        seed: 5,
        ..SyntheticSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec).unwrap();
    let (v, k, sweeps) = (200, 10, 100);
    let cfg = LdaConfig {
        topics: k,
        iterations: sweeps,
        seed: 11,
        ..LdaConfig::default()
    };
    let mut s = Sampler::new(&corpus.documents, v, cfg).unwrap();
    let total = recount_matches(&s, v, k)?;
    ensure(total == 1000, || format!("fixture has {total} tokens"))?;
    for sweep in 1..=sweeps {
        s.sweep();
        recount_matches(&s, v, k).map_err(|e| format!("after sweep {sweep}: {e}"))?;
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("{sweeps} sweeps over 1000 tokens, invariants exact"))
}

fn normalization() -> Outcome {
    let corpus = common::dated_corpus(150, 30, 8);
    let mut checked = 0;
    for (k, seed) in [(1, 1), (3, 2), (7, 3), (20, 4)] {
        let cfg = LdaConfig {
            topics: k,
            iterations: 30,
            seed,
            ..LdaConfig::default()
        };
        let m = train(corpus.documents.clone(), corpus.vocabulary.clone(), cfg).unwrap();
        for (name, mat) in [("theta", m.theta()), ("phi", m.phi())] {
            for (i, r) in mat.rows().into_iter().enumerate() {
                let sum: f64 = r.sum();
                ensure((sum - 1.0).abs() <= 1e-9, || {
                    format!("K={k}: {name} row {i} sums to {sum}")
                })?;
            }
        }
        let ptw: f64 = ptw_all(&m).iter().sum();
        ensure((ptw - 100.0).abs() <= 1e-6, || format!("K={k}: PTW sums to {ptw}"))?;
        checked += 1;
    }
    Ok(format!("{checked} models, rows within 1e-9, PTW sums within 1e-6"))
}

/// Rising factorial a (a+1) ... (a+n-1).
fn rising(a: f64, n: u32) -> f64 {
    (0..n).map(|i| a + i as f64).product()
}

fn exact_posterior() -> Outcome {
    let start = Instant::now();
    let docs: Vec<Vec<usize>> = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
    let (v, k, a, b) = (3usize, 2usize, 0.5, 0.5);
    let n_tokens = 6;

    // Collapsed joint p(w, z) up to a constant, for every z.
    let mut exact = vec![0.0; 1 << n_tokens];
    for (code, p) in exact.iter_mut().enumerate() {
        let z: Vec<usize> = (0..n_tokens).map(|i| (code >> i) & 1).collect();
        let mut ndk = vec![[0u32; 2]; 3];
        let mut nkw = [[0u32; 3]; 2];
        let mut nk = [0u32; 2];
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let t = z[d * 2 + i];
                ndk[d][t] += 1;
                nkw[t][w] += 1;
                nk[t] += 1;
            }
        }
        let mut joint = 1.0;
        for row in &ndk {
            joint *= row.iter().map(|&n| rising(a, n)).product::<f64>() / rising(k as f64 * a, 2);
        }
        for t in 0..k {
            joint *= nkw[t].iter().map(|&n| rising(b, n)).product::<f64>() / rising(v as f64 * b, nk[t]);
        }
        *p = joint;
    }
    let norm: f64 = exact.iter().sum();
    exact.iter_mut().for_each(|p| *p /= norm);

    let documents: Vec<Document> = docs
        .iter()
        .enumerate()
        .map(|(d, w)| Document {
            comment_id: d.to_string(),
            word_ids: w.clone(),
            timestamp: None,
        })
        .collect();
    let chains = 50_000u64;
    let burn_in = 25;
    let mut hist = vec![0u64; 1 << n_tokens];
    for chain in 0..chains {
        let cfg = LdaConfig {
            topics: k,
            alpha: a,
            beta: b,
            iterations: burn_in,
            seed: 1_000_003 + chain,
        };
        let mut s = Sampler::new(&documents, v, cfg).unwrap();
        for _ in 0..burn_in {
            s.sweep();
        }
        let code = s
            .state()
            .assignments()
            .concat()
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &t)| acc | (t << i));
        hist[code] += 1;
    }
    let tv: f64 = 0.5
        * hist
            .iter()
            .zip(&exact)
            .map(|(&c, &p)| (c as f64 / chains as f64 - p).abs())
            .sum::<f64>();
    ensure(tv < 0.05, || format!("total variation {tv:.4} over {chains} draws"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "TV distance {tv:.4} from 64-state enumeration over {chains} restarted chains"
    ))
}

fn planted_recovery() -> Outcome {
    let start = Instant::now();
    let mut scores = Vec::new();
    for seed in 1..=10u64 {
        let spec = SyntheticSpec {
            seed,
            ..SyntheticSpec::default()
        };
        let corpus = generate_synthetic_corpus(&spec).unwrap();
        let cfg = LdaConfig {
            topics: 5,
            iterations: 500,
            seed: 100 + seed,
            ..LdaConfig::default()
        };
        let m = train(corpus.documents, corpus.vocabulary, cfg).unwrap();
        let matched = greedy_match(&rows(m.phi()), &rows(&corpus.true_phi));
        scores.push(matched.iter().map(|p| p.1).sum::<f64>() / matched.len() as f64);
    }
    let good = scores.iter().filter(|&&c| c >= 0.85).count();
    let shown: Vec<String> = scores.iter().map(|c| format!("{c:.3}")).collect();
    ensure(good >= 9, || format!("only {good}/10 seeds reach 0.85: {shown:?}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "{good}/10 seeds with mean matched cosine >= 0.85 (min {:.3})",
        scores.iter().copied().fold(1.0, f64::min)
    ))
}

fn perplexity_of(m: &Model<f64>, docs: &[Document]) -> f64 {
    let (theta, phi) = (m.theta(), m.phi());
    let mut log_sum = 0.0;
    let mut n = 0usize;
    for (d, doc) in docs.iter().enumerate() {
        for &w in &doc.word_ids {
            let p: f64 = (0..phi.nrows()).map(|k| theta[[d, k]] * phi[[k, w]]).sum();
            log_sum += p.ln();
            n += 1;
        }
    }
    (-log_sum / n as f64).exp()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn convergence() -> Outcome {
    let (mut first, mut last) = (Vec::new(), Vec::new());
    for seed in 1..=10u64 {
        let corpus = generate_synthetic_corpus(&SyntheticSpec {
            seed: 50 + seed,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let cfg = LdaConfig {
            topics: 5,
            iterations: 200,
            seed,
            ..LdaConfig::default()
        };
        let mut s = Sampler::new(&corpus.documents, corpus.vocabulary.len(), cfg).unwrap();
        for sweep in 1..=200 {
            s.sweep();
            let ll = s.log_likelihood();
            ensure(!ll.is_nan(), || {
                format!("seed {seed}: NaN log-likelihood at sweep {sweep}")
            })?;
            if sweep == 1 || sweep == 200 {
                let p = perplexity_of(&s.estimate(&corpus.documents, &corpus.vocabulary), &corpus.documents);
                if sweep == 1 {
                    first.push(p)
                } else {
                    last.push(p)
                }
            }
        }
    }
    let (p1, p200) = (median(first), median(last));
    ensure(p200 < p1, || {
        format!("median perplexity {p1:.3} at sweep 1, {p200:.3} at sweep 200")
    })?;
    Ok(format!(
        "median perplexity {p1:.2} -> {p200:.2}, no NaN in 2000 log-likelihoods"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path(), 200, 25, 4);
    let corpus = corpus.to_str().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let flags = ["--topics", "5", "--iterations", "50", "--seed", "7"];
        let mut args = vec!["train", corpus, "--out-dir", run];
        args.extend(flags);
        run_ok(&args, dir.path());
        let snap = format!("{run}/model.json");
        let topics = run_ok(&["topics", &snap], dir.path()).stdout;
        let trends = run_ok(&["trends", &snap, "--granularity", "month"], dir.path()).stdout;
        let bytes = |f: &str| std::fs::read(dir.path().join(run).join(f)).unwrap();
        outputs.push((bytes("model.json"), bytes("vocab.tsv"), topics, trends));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure(a.0 == b.0, || "snapshots differ".into())?;
    ensure(a.1 == b.1, || "vocabulary exports differ".into())?;
    ensure(a.2 == b.2, || "topic exports differ".into())?;
    ensure(a.3 == b.3, || "trend exports differ".into())?;
    ensure(!a.2.is_empty() && !a.3.is_empty(), || "empty export".into())?;
    Ok(format!("two runs byte-identical ({} byte snapshot)", a.0.len()))
}

fn trend_conservation() -> Outcome {
    let spec = SyntheticSpec {
        docs: 300,
        doc_length: DocLength::Fixed(40),
        alpha_gen: 0.05,
        seed: 21,
        ..SyntheticSpec::default()
    };
    let mut corpus = generate_synthetic_corpus(&spec).unwrap();
    let planted = 3;
    for (d, doc) in corpus.documents.iter_mut().enumerate() {
        let row = corpus.true_theta.row(d);
        let dominant = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let month = if dominant == planted { 1 } else { 2 };
        doc.timestamp = Some(Utc.with_ymd_and_hms(2018, month, 1 + d as u32 % 28, 6, 0, 0).unwrap());
    }
    let cfg = LdaConfig {
        topics: 5,
        alpha: 0.1,
        iterations: 150,
        seed: 4,
        ..LdaConfig::default()
    };
    let m = train(corpus.documents.clone(), corpus.vocabulary.clone(), cfg).unwrap();
    let all: Vec<usize> = (0..5).collect();
    let series = topic_trend(&m, &corpus.documents, Granularity::Month, &all, TrendMode::ThetaMass).unwrap();
    let mut per_month = [0usize; 2];
    for doc in &corpus.documents {
        per_month[doc.timestamp.unwrap().month() as usize - 1] += 1;
    }
    for (b, &count) in per_month.iter().enumerate() {
        let mass: f64 = series.iter().map(|s| s.points[b].mass).sum();
        ensure((mass - count as f64).abs() <= 1e-6, || {
            format!("bucket {b}: mass {mass} vs {count} documents")
        })?;
    }
    let t = greedy_match(&rows(m.phi()), &rows(&corpus.true_phi))[planted].0;
    let (jan, feb) = (series[t].points[0].mass, series[t].points[1].mass);
    ensure(jan > feb, || {
        format!("planted topic mass January {jan:.2}, February {feb:.2}")
    })?;
    Ok(format!(
        "buckets conserve {per_month:?} documents; planted topic January {jan:.1} > February {feb:.1}"
    ))
}

fn ranking() -> Outcome {
    let summary = |topic_id, ptw| TopicSummary {
        topic_id,
        ptw,
        top_terms: Vec::new(),
        label: None,
        label_conflict: false,
        label_annotations: Vec::new(),
    };
    let input = [(15, 2.7915), (30, 3.73729), (83, 3.5824)];
    let ranked = rank_by_ptw(input);
    let order: Vec<usize> = ranked.iter().map(|r| r.0).collect();
    ensure(order == [30, 83, 15], || format!("ranked {order:?}"))?;
    let summaries: Vec<TopicSummary> = ranked.iter().map(|&(t, p)| summary(t, p)).collect();
    let mut csv = Vec::new();
    write_topics_csv(&summaries, 1, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let exported: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    ensure(exported == ["30", "83", "15"], || format!("export order {exported:?}"))?;
    Ok("PTW 3.73729, 3.5824, 2.7915 rank topics 30, 83, 15".into())
}

fn agreement_metric() -> Outcome {
    let ann = |topic_id, who: &str, label: &str| Annotation {
        topic_id,
        annotator_id: who.into(),
        label: label.into(),
        timestamp: Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap(),
    };
    let store = LabelStore::from_annotations(vec![
        ann(0, "e1", "x"),
        ann(0, "e2", "x"),
        ann(0, "e3", "y"),
        ann(1, "e1", "Misogyny"),
        ann(1, "e2", "Misogyny"),
        ann(1, "e3", "Misogyny"),
        ann(1, "e4", "Misogyny"),
    ]);
    let a = agreement(&store, &[0, 1]).unwrap();
    ensure(a.per_topic[&0] == 1.0 / 3.0, || {
        format!("{{x,x,y}} scored {}", a.per_topic[&0])
    })?;
    ensure(a.per_topic[&1] == 1.0, || {
        format!("unanimous panel scored {}", a.per_topic[&1])
    })?;
    Ok("{x,x,y} = 1/3, unanimous four = 1.0".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("default-parameter fidelity", default_parameters),
        ("count conservation", count_conservation),
        ("normalization", normalization),
        ("exact-posterior oracle", exact_posterior),
        ("planted-topic recovery", planted_recovery),
        ("convergence", convergence),
        ("determinism", determinism),
        ("trend conservation", trend_conservation),
        ("ranking semantics", ranking),
        ("agreement metric", agreement_metric),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
