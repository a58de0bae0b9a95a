//! Local review server: read-only views over one findings document plus a
//! labels file that is the only thing ever written.

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use pdflow_core::report::text::ropa_markdown;
use pdflow_core::report::{rule_id, FindingsDocument};
use pdflow_core::triage::{apply_labels, precision_table, LabelStore, TriageLabel, Verdict};
use pdflow_core::views::{build_flow_table, build_heatmap, build_ropa, build_type_view, Filter, TableKey};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::commands::{load_document, load_labels, now_rfc3339, write_atomic};

const INDEX_HTML: &str = include_str!("../assets/index.html");
const DEFAULT_PAGE_SIZE: usize = 50;
const MAX_PAGE_SIZE: usize = 1000;
const DEFAULT_CONTEXT: usize = 3;
const MAX_CONTEXT: usize = 200;

pub struct AppState {
    doc: FindingsDocument,
    root: PathBuf,
    labels_path: PathBuf,
    threshold: usize,
    /// Held across the file write so label updates are serialized.
    labels: Mutex<LabelStore>,
}

impl AppState {
    pub fn new(doc: FindingsDocument, root: PathBuf, labels_path: PathBuf, labels: LabelStore, threshold: usize) -> Self {
        AppState {
            doc,
            root,
            labels_path,
            threshold,
            labels: Mutex::new(labels),
        }
    }

    /// Loads the document and labels; finding paths resolve against `root`,
    /// else against the scan root recorded in the document.
    pub fn load(findings: &Path, labels: &Path, root: Option<PathBuf>, threshold: usize) -> Result<Self> {
        let doc = load_document(findings)?;
        let store = load_labels(labels)?;
        let root = root.unwrap_or_else(|| PathBuf::from(&doc.root));
        Ok(AppState::new(doc, root, labels.to_path_buf(), store, threshold))
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.into())
    }

    fn not_found(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::NOT_FOUND, msg.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;
type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(|| async { Html(INDEX_HTML) }))
        .route("/api/findings", get(findings))
        .route("/api/views/types", get(types))
        .route("/api/views/heatmap", get(heatmap))
        .route("/api/ropa", get(ropa))
        .route("/api/snippet/{id}", get(snippet))
        .route("/api/labels", get(list_labels).post(post_label))
        .route("/api/metrics", get(metrics))
        .with_state(state)
}

fn parse_usize(name: &str, value: &str) -> Result<usize, ApiError> {
    value
        .parse()
        .map_err(|_| ApiError::bad_request(format!("`{name}` must be a non-negative integer")))
}

async fn findings(State(state): Shared, Query(params): Query<Vec<(String, String)>>) -> ApiResult {
    let mut group_by = TableKey::None;
    let mut filters: Vec<Filter> = Vec::new();
    let mut verdicts: Vec<Verdict> = Vec::new();
    let mut page = 1;
    let mut page_size = DEFAULT_PAGE_SIZE;
    for (key, value) in &params {
        match key.as_str() {
            "group_by" => group_by = value.parse().map_err(|e| ApiError::bad_request(format!("{e}")))?,
            "filter" => filters.push(value.parse().map_err(|e| ApiError::bad_request(format!("{e}")))?),
            "verdict" => verdicts.push(value.parse().map_err(ApiError::bad_request)?),
            "page" => page = parse_usize(key, value)?.max(1),
            "page_size" => page_size = parse_usize(key, value)?.clamp(1, MAX_PAGE_SIZE),
            other => return Err(ApiError::bad_request(format!("unknown query parameter `{other}`"))),
        }
    }
    let labeled = {
        let store = state.labels.lock().await;
        apply_labels(&state.doc, store.labels())
    };
    let table = build_flow_table(&state.doc.findings, group_by, &filters);
    let mut groups = Vec::new();
    let mut items = Vec::new();
    for group in &table.groups {
        let mut count = 0;
        for row in &group.rows {
            let verdict = labeled.verdict(&row.id);
            if !verdicts.is_empty() && !verdicts.contains(&verdict) {
                continue;
            }
            count += 1;
            let mut item = serde_json::to_value(row).expect("row serializes");
            item["group"] = json!(group.key);
            item["verdict"] = json!(verdict);
            items.push(item);
        }
        if count > 0 {
            groups.push(json!({ "key": group.key, "count": count }));
        }
    }
    let total = items.len();
    let start = (page - 1).saturating_mul(page_size).min(total);
    let end = (start + page_size).min(total);
    Ok(Json(json!({
        "total": total,
        "page": page,
        "page_size": page_size,
        "pages": total.div_ceil(page_size),
        "group_by": group_by,
        "groups": groups,
        "items": &items[start..end],
    })))
}

async fn types(State(state): Shared) -> ApiResult {
    Ok(Json(json!(build_type_view(&state.doc.findings))))
}

async fn heatmap(State(state): Shared) -> ApiResult {
    Ok(Json(json!(build_heatmap(&state.doc.findings))))
}

async fn ropa(State(state): Shared) -> ApiResult {
    let summary = build_ropa(&state.doc.findings);
    let markdown = ropa_markdown(&summary, None);
    Ok(Json(json!({ "summary": summary, "markdown": markdown })))
}

#[derive(Debug, Deserialize)]
struct SnippetQuery {
    context: Option<usize>,
}

/// Joins a document path onto the root, refusing anything that could
/// escape it.
fn confined(root: &Path, rel: &str) -> Option<PathBuf> {
    let rel = Path::new(rel);
    rel.components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
        .then(|| root.join(rel))
}

async fn snippet(State(state): Shared, UrlPath(id): UrlPath<String>, Query(q): Query<SnippetQuery>) -> ApiResult {
    let finding = state
        .doc
        .finding(&id)
        .ok_or_else(|| ApiError::not_found(format!("no finding with id `{id}`")))?;
    let gone = || ApiError::not_found(format!("source file `{}` is no longer available", finding.path));
    let path = confined(&state.root, &finding.path).ok_or_else(gone)?;
    let text = tokio::fs::read_to_string(&path).await.map_err(|_| gone())?;
    let lines: Vec<&str> = text.lines().collect();
    let (first, last) = (finding.span.start_line, finding.span.end_line);
    if last > lines.len().max(1) {
        return Err(gone());
    }
    let context = q.context.unwrap_or(DEFAULT_CONTEXT).min(MAX_CONTEXT);
    let from = first.saturating_sub(context).max(1);
    let to = (last + context).min(lines.len());
    let shown: Vec<Value> = (from..=to)
        .map(|n| json!({ "number": n, "text": lines[n - 1], "in_span": n >= first && n <= last }))
        .collect();
    let verdict = {
        let store = state.labels.lock().await;
        store.get(&id).cloned()
    };
    Ok(Json(json!({
        "id": finding.id,
        "path": finding.path,
        "rule_id": rule_id(finding),
        "pattern": finding.instance.shape.name(),
        "pattern_notation": finding.instance.shape.notation(),
        "pattern_description": finding.instance.shape.description(),
        "finding": finding,
        "label": verdict,
        "lines": shown,
    })))
}

async fn list_labels(State(state): Shared) -> ApiResult {
    let store = state.labels.lock().await;
    Ok(Json(json!(store.labels())))
}

#[derive(Debug, Deserialize)]
struct LabelRequest {
    finding_id: String,
    verdict: Verdict,
    #[serde(default)]
    note: Option<String>,
    #[serde(default)]
    reviewer: Option<String>,
}

async fn post_label(State(state): Shared, body: Result<Json<LabelRequest>, axum::extract::rejection::JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if state.doc.finding(&req.finding_id).is_none() {
        return Err(ApiError::not_found(format!("no finding with id `{}`", req.finding_id)));
    }
    let label = TriageLabel {
        finding_id: req.finding_id,
        verdict: req.verdict,
        note: req.note,
        reviewer: req.reviewer,
        timestamp: now_rfc3339(),
    };
    let mut store = state.labels.lock().await;
    let mut updated = store.clone();
    updated.upsert(label.clone());
    write_atomic(&state.labels_path, &updated.to_json())
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")))?;
    *store = updated;
    Ok((StatusCode::OK, Json(json!(label))).into_response())
}

async fn metrics(State(state): Shared) -> ApiResult {
    let labeled = {
        let store = state.labels.lock().await;
        apply_labels(&state.doc, store.labels())
    };
    let table = precision_table(&state.doc, &labeled, state.threshold);
    let mut value = json!(table);
    for (cell, shown) in value["cells"].as_array_mut().expect("cells array").iter_mut().zip(&table.cells) {
        cell["display"] = json!(shown.to_string());
    }
    value["warnings"] = json!(labeled.warnings);
    Ok(Json(value))
}

pub async fn serve(state: AppState, host: &str, port: u16) -> Result<()> {
    let addr = format!("{host}:{port}");
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            anyhow::anyhow!("port {port} is already in use")
        } else {
            anyhow::Error::new(e).context(format!("cannot listen on {addr}"))
        }
    })?;
    eprintln!(
        "serving {} findings on http://{addr} (labels: {})",
        state.doc.findings.len(),
        state.labels_path.display()
    );
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .context("server failed")
}
