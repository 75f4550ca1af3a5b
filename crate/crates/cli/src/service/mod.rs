//! JSON-over-HTTP API around the discovery pipeline.
//!
//! | route | |
//! |---|---|
//! | `POST /logs` | multipart upload, returns `{log_id, stats}` |
//! | `GET /logs/{id}` | stats, last stage report, current net |
//! | `GET /logs/{id}/dfg?min_weight=` | directly-follows graph |
//! | `POST /logs/{id}/discover` | config JSON plus `algorithm`, returns net, report and DOT |
//! | `GET /nets/{id}.pnml`, `.dot`, plain | PNML, DOT or JSON |
//! | `GET /nets/{id}/disconnected` | disconnected transitions in greedy order |
//! | `POST /nets/{id}/remove-disconnected` | `{k}`, removes the first k of that order |

mod error;
mod state;

use std::net::SocketAddr;

use alphappp::petri::DotOptions;
use alphappp::{preset, CsvMapping, DiscoveryConfig, Dfg, EventLog, VariantFilter};
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use tower_http::cors::CorsLayer;

pub use error::ApiError;
pub use state::{AppState, NetEntry, Session};

use crate::pipeline::{self, Algorithm, Discovered};

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    let limit = state.max_upload();
    Router::new()
        .route("/logs", post(upload_log).layer(DefaultBodyLimit::max(limit)))
        .route("/logs/{id}", get(log_info))
        .route("/logs/{id}/dfg", get(log_dfg))
        .route("/logs/{id}/discover", post(discover))
        .route("/nets/{file}", get(net_file))
        .route("/nets/{id}/disconnected", get(disconnected))
        .route("/nets/{id}/remove-disconnected", post(remove_disconnected))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn upload_log(State(state): State<AppState>, mut multipart: Multipart) -> ApiResult<Json<Value>> {
    let mut file: Option<(String, Bytes)> = None;
    let mut mapping = CsvMapping::default();
    let (mut custom_cols, mut ts_given) = (false, false);
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::new(e.status(), e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(str::to_string);
        let data = field
            .bytes()
            .await
            .map_err(|e| ApiError::new(e.status(), e.body_text()))?;
        let text = || String::from_utf8_lossy(&data).trim().to_string();
        match (name.as_str(), file_name) {
            (_, Some(f)) => file = Some((f, data)),
            ("file", None) => file = Some((String::new(), data)),
            ("case_col", _) => {
                custom_cols = true;
                mapping.case_col = text()
            }
            ("activity_col", _) => {
                custom_cols = true;
                mapping.activity_col = text()
            }
            ("timestamp_col", _) => {
                ts_given = true;
                mapping.timestamp_col = Some(text()).filter(|c| !c.is_empty())
            }
            ("timestamp_format", _) => mapping.format = Some(text()),
            ("delimiter", _) => {
                mapping.delimiter = text()
                    .chars()
                    .next()
                    .ok_or_else(|| ApiError::bad_request("empty delimiter"))?
            }
            (other, _) => return Err(ApiError::bad_request(format!("unexpected form field `{other}`"))),
        }
    }
    if custom_cols && !ts_given {
        mapping.timestamp_col = None;
    }
    let (file_name, bytes) = file.ok_or_else(|| ApiError::bad_request("multipart body has no file"))?;

    blocking(move || {
        let log = EventLog::parse_bytes(&bytes, &file_name, Some(&mapping))
            .map_err(|e| ApiError::unprocessable(format!("cannot parse `{file_name}`: {e}")))?;
        if log.is_empty() {
            return Err(ApiError::unprocessable(format!("`{file_name}` contains no traces")));
        }
        let mapping_json = serde_json::to_vec(&mapping).expect("mapping serializes");
        let id = state::digest(&[&bytes, &mapping_json]);
        let stats = log.stats();
        state
            .insert_log(&id, log)
            .map_err(|e| ApiError::internal(format!("cannot store log: {e}")))?;
        Ok(Json(json!({ "log_id": id, "stats": stats })))
    })
    .await
}

fn session(state: &AppState, id: &str) -> ApiResult<std::sync::Arc<tokio::sync::Mutex<Session>>> {
    state.session(id).ok_or_else(|| ApiError::not_found("log", id))
}

async fn log_info(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    let s = s.lock().await;
    Ok(Json(json!({
        "log_id": s.log_id,
        "stats": s.log.stats(),
        "last_report": s.last_report,
        "current_net": s.current_net,
    })))
}

#[derive(Deserialize)]
struct DfgQuery {
    min_weight: Option<f64>,
}

async fn log_dfg(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DfgQuery>,
) -> ApiResult<Json<Value>> {
    let log = session(&state, &id)?.lock().await.log.clone();
    blocking(move || {
        let full = Dfg::from_log(&log.ensure_augmented());
        let mean = full.mean_weight().ok();
        let dfg = match q.min_weight {
            Some(w) if w.is_nan() || w < 0.0 => return Err(ApiError::bad_request("min_weight must be non-negative")),
            Some(w) => full.restrict(w),
            None => full,
        };
        let arcs: Vec<Value> = dfg
            .arcs()
            .map(|(a, b, w)| json!({ "source": a, "target": b, "weight": w }))
            .collect();
        Ok(Json(json!({
            "nodes": dfg.nodes(),
            "arcs": arcs,
            "mean_weight": mean,
            "dot": dfg.to_dot(),
        })))
    })
    .await
}

/// Body of `POST /logs/{id}/discover`: the configuration fields at top level,
/// or a `preset` name, plus optional `algorithm`, `variant_filter` and
/// `fragments`.
#[derive(Debug)]
struct DiscoverRequest {
    algorithm: Algorithm,
    config: DiscoveryConfig,
    filter: Option<VariantFilter>,
    filter_text: Option<String>,
    fragments: bool,
}

fn parse_discover(body: &[u8]) -> ApiResult<DiscoverRequest> {
    let mut obj: Map<String, Value> = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("body is not a JSON object: {e}")))?;
    let algorithm = match obj.remove("algorithm") {
        None => Algorithm::Alphappp,
        Some(v) => serde_json::from_value(v).map_err(|_| ApiError::bad_request("algorithm must be `alphappp` or `alpha`"))?,
    };
    let filter_text = match obj.remove("variant_filter") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(ApiError::bad_request("variant_filter must be a string")),
    };
    let filter = filter_text
        .as_deref()
        .map(pipeline::parse_variant_filter)
        .transpose()
        .map_err(ApiError::bad_request)?;
    let fragments = match obj.remove("fragments") {
        None => false,
        Some(Value::Bool(b)) => b,
        Some(_) => return Err(ApiError::bad_request("fragments must be a boolean")),
    };
    let config = match obj.remove("preset") {
        Some(Value::String(name)) => {
            if !obj.is_empty() {
                return Err(ApiError::bad_request("give either a preset or configuration fields, not both"));
            }
            preset(&name)?
        }
        Some(_) => return Err(ApiError::bad_request("preset must be a string")),
        None if obj.is_empty() && algorithm == Algorithm::Alpha => DiscoveryConfig::default(),
        None => DiscoveryConfig::from_json(&Value::Object(obj).to_string())?,
    };
    Ok(DiscoverRequest {
        algorithm,
        config,
        filter,
        filter_text,
        fragments,
    })
}

fn net_json(id: &str, found: &Discovered, fragments: bool) -> Value {
    json!({
        "net_id": id,
        "net": found.net,
        "stage_report": found.report,
        "dot": found.net.to_dot(&DotOptions { fragments }),
    })
}

async fn discover(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req = parse_discover(&body)?;
    let session = session(&state, &id)?;
    // one discovery at a time per session
    let mut guard = session.lock_owned().await;
    blocking(move || {
        let s = &mut *guard;
        let found = match (&req.filter, req.algorithm) {
            (None, Algorithm::Alphappp) => s.discover_cached(&req.config)?,
            (filter, algorithm) => {
                let log = match filter {
                    Some(f) => s.log.filter_variants(*f)?,
                    None => (*s.log).clone(),
                };
                pipeline::discover(&log, algorithm, &req.config)?
            }
        };
        let cfg_json = serde_json::to_string(&req.config).expect("config serializes");
        let net_id = state::digest(&[
            s.log_id.as_bytes(),
            req.algorithm.to_string().as_bytes(),
            req.filter_text.as_deref().unwrap_or("").as_bytes(),
            cfg_json.as_bytes(),
        ]);
        state.insert_net(
            &net_id,
            NetEntry {
                log_id: s.log_id.clone(),
                net: found.net.clone(),
                replay_log: found.replay_log.clone(),
            },
        );
        s.last_report = Some(found.report.clone());
        s.current_net = Some(net_id.clone());
        Ok(Json(net_json(&net_id, &found, req.fragments)))
    })
    .await
}

async fn net_file(State(state): State<AppState>, Path(file): Path<String>) -> ApiResult<Response> {
    let (id, kind) = match file.rsplit_once('.') {
        Some((id, ext)) => (id, ext),
        None => (file.as_str(), "json"),
    };
    let entry = state.net(id).ok_or_else(|| ApiError::not_found("net", &file))?;
    let net = &entry.net;
    Ok(match kind {
        "pnml" => ([(header::CONTENT_TYPE, "application/xml")], net.to_pnml()).into_response(),
        "dot" => (
            [(header::CONTENT_TYPE, "text/vnd.graphviz")],
            net.to_dot(&DotOptions::default()),
        )
            .into_response(),
        "json" => Json(json!({ "net_id": id, "log_id": entry.log_id, "net": net })).into_response(),
        _ => return Err(ApiError::not_found("net", &file)),
    })
}

async fn disconnected(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let entry = state.net(&id).ok_or_else(|| ApiError::not_found("net", &id))?;
    blocking(move || {
        let counts = entry.replay_log.activity_multiset();
        let order = entry.net.greedy_removal_order(&counts);
        let items: Vec<Value> = order
            .iter()
            .map(|t| {
                let tr = entry.net.net.transition(*t).expect("listed transition exists");
                json!({ "id": t, "label": tr.label(), "frequency": counts.get(&tr.activity) })
            })
            .collect();
        let curve = entry.net.removal_curve(&counts, &entry.replay_log, order.len());
        Ok(Json(json!({ "net_id": id, "disconnected": items, "fitting_curve": curve })))
    })
    .await
}

/// `{"k": <count>}` and nothing else.
fn parse_remove(body: &[u8]) -> ApiResult<usize> {
    let bad = || ApiError::bad_request("expected {\"k\": <count>}");
    let obj: Map<String, Value> = serde_json::from_slice(body).map_err(|_| bad())?;
    match (obj.len(), obj.get("k").and_then(Value::as_u64)) {
        (1, Some(k)) => Ok(k as usize),
        _ => Err(bad()),
    }
}

async fn remove_disconnected(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let k = parse_remove(&body)?;
    let entry = state.net(&id).ok_or_else(|| ApiError::not_found("net", &id))?;
    let session = session(&state, &entry.log_id)?;
    let mut guard = session.lock_owned().await;
    blocking(move || {
        let counts = entry.replay_log.activity_multiset();
        let (net, victims) = pipeline::remove_greedy(&entry.net, &counts, k);
        let removed: Vec<Value> = victims
            .iter()
            .map(|t| json!({ "id": t, "label": entry.net.net.transition(*t).and_then(|x| x.label()) }))
            .collect();
        let new_id = if victims.is_empty() {
            id.clone()
        } else {
            state::digest(&[id.as_bytes(), b"remove-disconnected", &(victims.len() as u64).to_le_bytes()])
        };
        let fitting = net.fitting_fraction(&entry.replay_log);
        let body = json!({
            "net_id": new_id,
            "parent": id,
            "removed": removed,
            "net": net,
            "dot": net.to_dot(&DotOptions::default()),
            "fitting_fraction": fitting,
        });
        state.insert_net(
            &new_id,
            NetEntry {
                log_id: entry.log_id.clone(),
                net,
                replay_log: entry.replay_log.clone(),
            },
        );
        guard.current_net = Some(new_id);
        Ok(Json(body))
    })
    .await
}
