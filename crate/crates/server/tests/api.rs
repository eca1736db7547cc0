use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use litmap_core::corpus::{DocId, Document, QueryId, Stage, Store};
use litmap_core::screening::{FlowReport, ScreeningConfig, ScreeningEngine};
use litmap_server::{router, AppState, REVIEWER_HEADER};
use serde_json::{json, Value};
use tower::ServiceExt;

fn store(n: usize) -> Store {
    let mut s = Store::new();
    for i in 0..n {
        let id = format!("d{i:02}");
        let title = format!("Housing and migration study {}", ["alpha", "beta", "gamma", "delta"][i % 4]);
        s.upsert(Document::new(&id, format!("{title} {}", "x".repeat(i + 1)), Some(2000 + i as i32)).with_cited_by(i as u64))
            .unwrap();
        s.add_membership(&DocId(id), &QueryId::from("3G"), i as u32 + 1).unwrap();
    }
    s
}

fn app(n: usize, reviewers: usize) -> (axum::Router, Arc<AppState>) {
    let engine = ScreeningEngine::new(ScreeningConfig { reviewers_per_doc: reviewers, ..Default::default() });
    let at = Utc.with_ymd_and_hms(2020, 8, 3, 10, 0, 0).unwrap();
    let state = Arc::new(AppState::new(store(n), engine).with_clock(Arc::new(move || at)));
    (router(state.clone()), state)
}

async fn call(app: &axum::Router, method: &str, uri: &str, reviewer: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(r) = reviewer {
        req = req.header(REVIEWER_HEADER, r);
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn decision(id: &str, doc: &str, pass: &str, group: i64) -> Value {
    json!({"decision_id": id, "doc_id": doc, "pass": pass, "group": group})
}

fn uuid(n: u32) -> String {
    format!("00000000-0000-4000-8000-{n:012}")
}

#[tokio::test]
async fn queue_pages_in_server_order() {
    let (app, _) = app(20, 1);
    let (st, page) = call(&app, "GET", "/api/queue?pass=title&per_page=8", Some("r1"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(page["total"], 20);
    let ids: Vec<&str> = page["items"].as_array().unwrap().iter().map(|i| i["doc_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["d00", "d01", "d02", "d03", "d04", "d05", "d06", "d07"]);
    let (_, last) = call(&app, "GET", "/api/queue?pass=title&per_page=8&page=2", Some("r1"), None).await;
    assert_eq!(last["items"].as_array().unwrap().len(), 4);
    let (st, beyond) = call(&app, "GET", "/api/queue?pass=title&per_page=8&page=9", Some("r1"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert!(beyond["items"].as_array().unwrap().is_empty());
    let (st, _) = call(&app, "GET", "/api/queue?pass=summary", Some("r1"), None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (_, deeper) = call(&app, "GET", "/api/queue?pass=abstract", Some("r1"), None).await;
    assert_eq!(deeper["total"], 0);
}

#[tokio::test]
async fn decisions_are_idempotent_on_retry() {
    let (app, state) = app(20, 1);
    let body = decision(&uuid(1), "d03", "title", 4);
    let (st, first) = call(&app, "POST", "/api/decisions", Some("r1"), Some(body.clone())).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(first["group"], 4);
    assert_eq!(first["reviewer"], "r1");
    for _ in 0..3 {
        let (st, again) = call(&app, "POST", "/api/decisions", Some("r1"), Some(body.clone())).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(again, first);
    }
    let n = state.snapshot(|s| s.decisions().len()).await;
    assert_eq!(n, 1);
    // same id, different content
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(1), "d03", "title", 2))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    // same reviewer, same doc, fresh id
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(2), "d03", "title", 1))).await;
    assert_eq!(st, StatusCode::CONFLICT);
}

#[tokio::test]
async fn validation_errors() {
    let (app, _) = app(3, 1);
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(1), "d00", "title", 5))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", "/api/decisions", None, Some(decision(&uuid(1), "d00", "title", 3))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(1), "nope", "title", 3))).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(1), "d00", "abstract", 3))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let mut b = decision(&uuid(1), "d00", "title", 3);
    b["reviewer"] = json!("r2");
    let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(b.clone())).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", "/api/decisions", None, Some(b)).await;
    assert_eq!(st, StatusCode::CREATED);
}

#[tokio::test]
async fn prisma_tracks_decisions() {
    let (app, state) = app(20, 1);
    let (_, before) = call(&app, "GET", "/api/prisma", None, None).await;
    let before: FlowReport = serde_json::from_value(before).unwrap();
    assert_eq!(before.passes[&litmap_core::screening::Pass::Title].pending, 20);
    for (i, g) in [4, 3, 2, 0, 1].into_iter().enumerate() {
        let doc = format!("d{i:02}");
        let (st, _) = call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(i as u32), &doc, "title", g))).await;
        assert_eq!(st, StatusCode::CREATED);
    }
    let (_, after) = call(&app, "GET", "/api/prisma", None, None).await;
    let after: FlowReport = serde_json::from_value(after).unwrap();
    let title = &after.passes[&litmap_core::screening::Pass::Title];
    assert_eq!(title.pending, 15);
    assert_eq!(title.groups, [1, 1, 1, 1, 1]);
    let (_, queue) = call(&app, "GET", "/api/queue?pass=title", Some("r1"), None).await;
    assert_eq!(queue["total"], 15);
    let (_, pooled) = call(&app, "GET", "/api/queue?pass=abstract", Some("r1"), None).await;
    assert_eq!(pooled["total"], 3);
    // a deeper group 0 excludes
    call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(90), "d02", "fulltext", 0))).await;
    let stage = state.snapshot(|s| s.get(&"d02".into()).unwrap().stage).await;
    assert_eq!(stage, Stage::Excluded);
    let (_, flow) = call(&app, "GET", "/api/prisma", None, None).await;
    assert_eq!(flow["pruned"], 1);
    assert_eq!(flow["eligible"], 19);
}

#[tokio::test]
async fn two_reviewer_conflict_and_resolution() {
    let (app, _) = app(4, 2);
    call(&app, "POST", "/api/decisions", Some("alice"), Some(decision(&uuid(1), "d01", "title", 3))).await;
    let (_, q) = call(&app, "GET", "/api/queue?pass=title", Some("bob"), None).await;
    let item = q["items"].as_array().unwrap().iter().find(|i| i["doc_id"] == "d01").unwrap().clone();
    assert_eq!(item["other_decisions"], 1);
    assert!(item.get("group").is_none());
    let (_, q) = call(&app, "GET", "/api/queue?pass=title", Some("alice"), None).await;
    assert!(q["items"].as_array().unwrap().iter().all(|i| i["doc_id"] != "d01"));
    call(&app, "POST", "/api/decisions", Some("bob"), Some(decision(&uuid(2), "d01", "title", 0))).await;
    let (_, c) = call(&app, "GET", "/api/conflicts", None, None).await;
    let c = c.as_array().unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0]["doc_id"], "d01");
    assert_eq!(c[0]["reviews"].as_array().unwrap().len(), 2);
    let (_, flow) = call(&app, "GET", "/api/prisma", None, None).await;
    assert_eq!(flow["passes"]["title"]["conflicts"], 1);

    let body = json!({"decision_id": uuid(3), "pass": "title", "group": 3});
    let (st, rec) = call(&app, "POST", "/api/conflicts/d01/resolve", Some("lead"), Some(body.clone())).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(rec["action"], "resolution");
    let (st, _) = call(&app, "POST", "/api/conflicts/d01/resolve", Some("lead"), Some(body)).await;
    assert_eq!(st, StatusCode::OK);
    let (_, c) = call(&app, "GET", "/api/conflicts", None, None).await;
    assert!(c.as_array().unwrap().is_empty());
    let body = json!({"decision_id": uuid(4), "pass": "title", "group": 3});
    let (st, _) = call(&app, "POST", "/api/conflicts/d02/resolve", Some("lead"), Some(body)).await;
    assert_eq!(st, StatusCode::CONFLICT);
}

#[tokio::test]
async fn persist_hook_runs_once_per_stored_decision() {
    let engine = ScreeningEngine::default();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let sink = seen.clone();
    let state = AppState::new(store(3), engine).with_persist(Arc::new(move |s: &Store| {
        sink.lock().unwrap().push(s.decisions().len());
        Ok(())
    }));
    let app = router(Arc::new(state));
    let body = decision(&uuid(7), "d00", "title", 4);
    call(&app, "POST", "/api/decisions", Some("r1"), Some(body.clone())).await;
    call(&app, "POST", "/api/decisions", Some("r1"), Some(body)).await;
    call(&app, "POST", "/api/decisions", Some("r1"), Some(decision(&uuid(8), "d01", "title", 9))).await;
    assert_eq!(*seen.lock().unwrap(), vec![1]);
}

#[tokio::test]
async fn concurrent_retries_store_one_record_each() {
    let (app, state) = app(20, 1);
    let mut handles = Vec::new();
    for i in 0..20u32 {
        for _ in 0..3 {
            let app = app.clone();
            let body = decision(&uuid(100 + i), &format!("d{i:02}"), "title", i64::from(i % 5));
            handles.push(tokio::spawn(async move { call(&app, "POST", "/api/decisions", Some("r1"), Some(body)).await.0 }));
        }
    }
    let mut created = 0;
    for h in handles {
        let st = h.await.unwrap();
        assert!(st == StatusCode::CREATED || st == StatusCode::OK);
        created += usize::from(st == StatusCode::CREATED);
    }
    assert_eq!(created, 20);
    assert_eq!(state.snapshot(|s| s.decisions().len()).await, 20);
}
