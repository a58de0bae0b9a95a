use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pdflow::serve::{router, AppState};
use pdflow_core::report::{emit_findings_json, FindingsDocument};
use pdflow_core::rulepack::RulePack;
use pdflow_core::scan::{scan, ScanConfig};
use pdflow_core::triage::LabelStore;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    dir: tempfile::TempDir,
    doc: FindingsDocument,
}

impl Fixture {
    fn new(name: &str) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
        let tree = dir.path().join("tree");
        std::fs::create_dir(&tree).unwrap();
        std::fs::copy(&src, tree.join(name)).unwrap();
        let doc = scan(&ScanConfig::new(vec![tree.clone()]), &RulePack::default_pack()).unwrap().document;
        Fixture { dir, doc }
    }

    fn tree(&self) -> PathBuf {
        self.dir.path().join("tree")
    }

    fn labels_path(&self) -> PathBuf {
        self.dir.path().join("labels.json")
    }

    fn app(&self, threshold: usize) -> Router {
        let store = LabelStore::parse(&std::fs::read_to_string(self.labels_path()).unwrap_or_default()).unwrap();
        router(Arc::new(AppState::new(self.doc.clone(), self.tree(), self.labels_path(), store, threshold)))
    }
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_label(app: &Router, body: Value) -> (StatusCode, Value) {
    let req = Request::post("/api/labels")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    call(app, req).await
}

#[tokio::test]
async fn findings_filtered_by_stem() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let (status, body) = get(&app, "/api/findings?filter=stem:email").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["total"], 7);
    let items = body["items"].as_array().unwrap();
    assert_eq!(items.len(), 7);
    assert!(items.iter().any(|i| i["flow_pattern_instance"] == "email+_ -findOne-> UserInfo"));
    assert!(items.iter().all(|i| i["verdict"] == "Unreviewed"));
}

#[tokio::test]
async fn findings_grouping_and_paging() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let (_, body) = get(&app, "/api/findings?group_by=sink-category&page_size=3&page=3").await;
    assert_eq!(body["total"], 7);
    assert_eq!(body["pages"], 3);
    assert_eq!(body["items"].as_array().unwrap().len(), 1);
    let keys: Vec<&str> = body["groups"].as_array().unwrap().iter().map(|g| g["key"].as_str().unwrap()).collect();
    assert_eq!(keys, ["M", "T", "C/D", "DB"]);
    let (_, body) = get(&app, "/api/findings?filter=sink-type:DB&filter=sink-type:T").await;
    assert_eq!(body["total"], 4);
    let (status, _) = get(&app, "/api/findings?group_by=colour").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&app, "/api/findings?page=x").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn views_and_ropa() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let (_, types) = get(&app, "/api/views/types").await;
    assert_eq!(types["total"], 7);
    let (_, heat) = get(&app, "/api/views/heatmap").await;
    assert_eq!(heat["total"], 7);
    let (_, ropa) = get(&app, "/api/ropa").await;
    assert!(ropa["markdown"].as_str().unwrap().contains("Categories of processing"));
    assert!(!ropa["summary"]["categories_of_personal_data"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn snippet_lookup() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let f = &fx.doc.findings[2];
    let (status, body) = get(&app, &format!("/api/snippet/{}?context=1", f.id)).await;
    assert_eq!(status, StatusCode::OK);
    let lines = body["lines"].as_array().unwrap();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["number"], f.span.start_line);
    assert_eq!(lines[1]["in_span"], true);
    assert!(lines[1]["text"].as_str().unwrap().contains("findOne"));
    assert_eq!(body["pattern"], f.instance.shape.name());

    let (status, _) = get(&app, "/api/snippet/0000000000000000").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    std::fs::remove_file(fx.tree().join("user_service.ts")).unwrap();
    let (status, _) = get(&app, &format!("/api/snippet/{}", f.id)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn labels_feed_metrics_and_persist() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(1);
    let f = &fx.doc.findings[0];
    let cell = |m: &Value| -> Value {
        m["cells"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["source_category"] == json!(f.source.categories[0]) && c["sink_category"] == json!(f.sink.category))
            .unwrap()
            .clone()
    };
    let (_, before) = get(&app, "/api/metrics").await;
    assert_eq!(cell(&before)["tp"], 0);
    assert_eq!(cell(&before)["display"], "-");

    let (status, label) = post_label(&app, json!({"finding_id": f.id, "verdict": "TP", "note": "real"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(label["verdict"], "TP");

    let (_, after) = get(&app, "/api/metrics").await;
    assert_eq!(cell(&after)["tp"], 1);
    assert_eq!(cell(&after)["display"], "1.00");
    assert_eq!(after["reviewed"], 1);

    let stored = LabelStore::parse(&std::fs::read_to_string(fx.labels_path()).unwrap()).unwrap();
    assert_eq!(stored.get(&f.id).unwrap().note.as_deref(), Some("real"));

    // A fresh server sees the persisted label.
    let (_, again) = get(&fx.app(1), "/api/metrics").await;
    assert_eq!(cell(&again)["tp"], 1);
    let (_, listed) = get(&app, "/api/findings?verdict=TP").await;
    assert_eq!(listed["total"], 1);
}

#[tokio::test]
async fn bad_labels_are_rejected() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let (status, _) = post_label(&app, json!({"finding_id": "nope", "verdict": "TP"})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post_label(&app, json!({"finding_id": fx.doc.findings[0].id, "verdict": "maybe"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(!fx.labels_path().exists());
}

#[tokio::test]
async fn server_never_touches_the_findings_document() {
    let fx = Fixture::new("user_service.ts");
    let path = fx.dir.path().join("findings.json");
    let text = emit_findings_json(&fx.doc);
    std::fs::write(&path, &text).unwrap();
    let state = AppState::load(&path, &fx.labels_path(), Some(fx.tree()), 20).unwrap();
    let app = router(Arc::new(state));
    for f in &fx.doc.findings {
        let (status, _) = post_label(&app, json!({"finding_id": f.id, "verdict": "FP"})).await;
        assert_eq!(status, StatusCode::OK);
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    let stored = LabelStore::parse(&std::fs::read_to_string(fx.labels_path()).unwrap()).unwrap();
    assert_eq!(stored.labels().len(), fx.doc.findings.len());
}

#[tokio::test]
async fn concurrent_label_writes_are_not_lost() {
    let fx = Fixture::new("user_service.ts");
    let app = fx.app(20);
    let mut tasks = Vec::new();
    for f in fx.doc.findings.clone() {
        let app = app.clone();
        tasks.push(tokio::spawn(async move { post_label(&app, json!({"finding_id": f.id, "verdict": "TP"})).await }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    let stored = LabelStore::parse(&std::fs::read_to_string(fx.labels_path()).unwrap()).unwrap();
    assert_eq!(stored.labels().len(), fx.doc.findings.len());
}

#[tokio::test]
async fn index_page_is_served() {
    let fx = Fixture::new("pattern_catalog.js");
    let resp = fx.app(20).oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}
