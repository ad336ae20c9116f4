use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use topicmine::lda::Model;
use topicmine::report::LabelStore;
use topicmine::trends::{topic_trend, Granularity, TrendMode};
use topicmine::vocab::{Document, Vocabulary};
use topicmine::{LdaConfig, LdaModel};
use topicmine_serve::{router, AppState, LabelHandle};

fn toy_model(timestamped: bool) -> LdaModel {
    let month = |m| timestamped.then(|| Utc.with_ymd_and_hms(2018, m, 3, 0, 0, 0).unwrap());
    let docs = vec![
        Document {
            comment_id: "a".into(),
            word_ids: vec![0, 0, 1],
            timestamp: month(1),
        },
        Document {
            comment_id: "b".into(),
            word_ids: vec![2, 2, 1],
            timestamp: month(2),
        },
        Document {
            comment_id: "c".into(),
            word_ids: vec![0, 2],
            timestamp: month(2),
        },
    ];
    let vocab = Vocabulary::from_parts(vec!["women".into(), "hate".into(), "guys".into()], vec![2, 2, 2]).unwrap();
    let cfg = LdaConfig {
        topics: 2,
        ..LdaConfig::default()
    };
    let z = vec![vec![0, 0, 0], vec![1, 1, 1], vec![0, 1]];
    Model::from_assignments(cfg, vocab, docs, &z, vec![]).unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    labels_path: std::path::PathBuf,
    state: AppState,
    model: Arc<LdaModel>,
}

fn fixture(read_only: bool, timestamped: bool) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let labels_path = dir.path().join("labels.json");
    let model = Arc::new(toy_model(timestamped));
    let state = AppState {
        model: Some(model.clone()),
        labels: Arc::new(LabelHandle::open(&labels_path).unwrap()),
        read_only,
    };
    Fixture {
        _dir: dir,
        labels_path,
        state,
        model,
    }
}

async fn call(state: &AppState, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone(), None).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

#[tokio::test]
async fn health_reports_model() {
    let f = fixture(false, true);
    let (status, body) = call(&f.state, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["model_loaded"], true);
    assert_eq!(body["topics"], 2);
}

#[tokio::test]
async fn unloaded_model_is_unavailable() {
    let mut f = fixture(false, true);
    f.state.model = None;
    let (status, _) = call(&f.state, "GET", "/api/topics", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = call(&f.state, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn topics_ranked_by_ptw() {
    let f = fixture(false, true);
    let (status, body) = call(&f.state, "GET", "/api/topics", None).await;
    assert_eq!(status, StatusCode::OK);
    let topics = body.as_array().unwrap();
    assert_eq!(topics.len(), 2);
    let ptw: f64 = topics.iter().map(|t| t["ptw"].as_f64().unwrap()).sum();
    assert!((ptw - 100.0).abs() < 1e-6);
    let order: Vec<u64> = topics.iter().map(|t| t["topic_id"].as_u64().unwrap()).collect();
    let expected: Vec<u64> = topicmine::trends::top_topics_by_ptw(&f.model, 2)
        .iter()
        .map(|r| r.0 as u64)
        .collect();
    assert_eq!(order, expected);
    assert_eq!(topics[0]["rank"], 1);
    assert_eq!(topics[0]["top_terms"].as_array().unwrap().len(), 3);

    let (_, body) = call(&f.state, "GET", "/api/topics?n_terms=1", None).await;
    for t in body.as_array().unwrap() {
        assert_eq!(t["top_terms"].as_array().unwrap().len(), 1);
    }
    let (_, body) = call(&f.state, "GET", "/api/topics?limit=1", None).await;
    assert_eq!(body.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn trend_endpoint_matches_library() {
    let f = fixture(false, true);
    let (status, body) = call(&f.state, "GET", "/api/topics/0/trend?granularity=month", None).await;
    assert_eq!(status, StatusCode::OK);
    let points = body["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    let lib = topic_trend(
        &f.model,
        f.model.documents(),
        Granularity::Month,
        &[0],
        TrendMode::ThetaMass,
    )
    .unwrap();
    assert_eq!(body, serde_json::to_value(&lib[0]).unwrap());

    let (status, _) = call(&f.state, "GET", "/api/topics/999/trend", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&f.state, "GET", "/api/topics/0/trend?granularity=week", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn untimestamped_corpus_conflicts() {
    let f = fixture(false, false);
    let (status, _) = call(&f.state, "GET", "/api/topics/0/trend", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn label_read_your_write_and_majority() {
    let f = fixture(false, true);
    let (status, body) = call(
        &f.state,
        "POST",
        "/api/topics/1/labels",
        Some(json!({"annotator_id": "A", "label": "Curse words"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["label"], "Curse words");
    // durable before the response
    assert_eq!(LabelStore::load(&f.labels_path).unwrap().len(), 1);

    let (_, topics) = call(&f.state, "GET", "/api/topics", None).await;
    let t1 = topics.as_array().unwrap().iter().find(|t| t["topic_id"] == 1).unwrap();
    assert_eq!(t1["label_annotations"].as_array().unwrap().len(), 1);
    assert_eq!(t1["label"], "Curse words");
    assert_eq!(t1["agreement"], Value::Null);

    call(
        &f.state,
        "POST",
        "/api/topics/1/labels",
        Some(json!({"annotator_id": "B", "label": "curse words"})),
    )
    .await;
    let (_, topics) = call(&f.state, "GET", "/api/topics", None).await;
    let t1 = topics.as_array().unwrap().iter().find(|t| t["topic_id"] == 1).unwrap();
    assert_eq!(t1["label"], "Curse words");
    assert_eq!(t1["label_conflict"], false);
    assert_eq!(t1["agreement"], 1.0);

    let (status, body) = call(&f.state, "GET", "/api/agreement", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["overall"], 1.0);
    assert_eq!(body["topics_evaluated"], 1);
}

#[tokio::test]
async fn label_validation() {
    let f = fixture(false, true);
    let (status, _) = call(
        &f.state,
        "POST",
        "/api/topics/0/labels",
        Some(json!({"annotator_id": "A", "label": "  "})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &f.state,
        "POST",
        "/api/topics/7/labels",
        Some(json!({"annotator_id": "A", "label": "x"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(LabelStore::load(&f.labels_path).unwrap().is_empty());
}

#[tokio::test]
async fn read_only_rejects_writes() {
    let f = fixture(true, true);
    let (status, _) = call(
        &f.state,
        "POST",
        "/api/topics/0/labels",
        Some(json!({"annotator_id": "A", "label": "x"})),
    )
    .await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert!(!f.labels_path.exists());
    assert!(f.state.labels.snapshot().is_empty());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writers_lose_nothing() {
    let f = fixture(false, true);
    let mut tasks = Vec::new();
    for i in 0..32 {
        let state = f.state.clone();
        tasks.push(tokio::spawn(async move {
            let body = json!({"annotator_id": format!("expert{i}"), "label": format!("label {}", i % 3)});
            call(&state, "POST", &format!("/api/topics/{}/labels", i % 2), Some(body))
                .await
                .0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    assert_eq!(f.state.labels.snapshot().len(), 32);
    assert_eq!(LabelStore::load(&f.labels_path).unwrap().len(), 32);
}

#[tokio::test]
async fn cors_headers_present() {
    let f = fixture(false, true);
    let req = Request::builder()
        .uri("/api/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = router(f.state.clone(), None).oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
