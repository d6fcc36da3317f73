//! HTTP/JSON surface.
//!
//! Readers grab the current snapshot (an `Arc`) and compute without any lock
//! held. Writers queue on one mutex, mutate a private copy, persist it, and
//! only then publish it, so a GET sees either the old or the new store and is
//! never held up by disk writes.

use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use ondt_core::path::ProvisionRequest;
use ondt_core::store::{DataDir, TwinStore};
use serde::Deserialize;
use serde::Serialize;

use crate::api::{self, CommitRequest, Mutation, SpanLossRequest};
use crate::config::{Analytics, Config};
use crate::error::ApiError;

struct Shared {
    snapshot: RwLock<Arc<TwinStore>>,
    writer: tokio::sync::Mutex<()>,
    data: Option<DataDir>,
    analytics: Analytics,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    /// `data` is where mutations are persisted; `None` keeps the twin in
    /// memory only.
    pub fn new(store: TwinStore, data: Option<DataDir>, analytics: Analytics) -> Self {
        AppState(Arc::new(Shared {
            snapshot: RwLock::new(Arc::new(store)),
            writer: tokio::sync::Mutex::new(()),
            data,
            analytics,
        }))
    }

    pub fn snapshot(&self) -> Arc<TwinStore> {
        self.0.snapshot.read().expect("snapshot lock").clone()
    }

    async fn mutate<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut TwinStore) -> Result<Mutation<T>, ApiError> + Send + 'static,
    {
        let _turn = self.0.writer.lock().await;
        let mut work = (*self.snapshot()).clone();
        let shared = self.0.clone();
        let (work, value) = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
            let m = f(&mut work)?;
            if let Some(data) = &shared.data {
                data.apply(&m.pending)?;
            }
            Ok((work, m.value))
        })
        .await
        .map_err(|e| ApiError::new("Internal", e.to_string()))??;
        *self.0.snapshot.write().expect("snapshot lock") = Arc::new(work);
        Ok(value)
    }
}

pub struct Json<T>(pub StatusCode, pub T);

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        (self.0, [(header::CONTENT_TYPE, "application/json")], api::render(&self.1)).into_response()
    }
}

fn ok<T: Serialize>(value: T) -> Json<T> {
    Json(StatusCode::OK, value)
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        Json(self.status(), self).into_response()
    }
}

type Reply<T> = Result<Json<T>, ApiError>;

fn body<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ApiError> {
    Ok(ondt_core::doc::parse(text)?)
}

fn now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

async fn topology(State(s): State<AppState>) -> Json<ondt_core::store::Topology> {
    ok(api::topology(&s.snapshot()))
}

async fn list_lightpaths(State(s): State<AppState>) -> Json<ondt_core::store::LightpathsDoc> {
    ok(api::lightpaths(&s.snapshot()))
}

async fn provision(State(s): State<AppState>, text: String) -> Reply<api::ProvisionOutcome> {
    let req: ProvisionRequest = body(&text)?;
    let analytics = s.0.analytics.clone();
    let out = s.mutate(move |st| api::provision(st, &req, now(), &analytics)).await?;
    let status = if out.lp_id.is_some() { StatusCode::CREATED } else { StatusCode::OK };
    Ok(Json(status, out))
}

async fn get_lightpath(State(s): State<AppState>, Path(id): Path<String>) -> Reply<ondt_core::store::Lightpath> {
    Ok(ok(api::lightpath(&s.snapshot(), &id)?))
}

async fn release(State(s): State<AppState>, Path(id): Path<String>) -> Reply<ondt_core::store::Lightpath> {
    Ok(ok(s.mutate(move |st| api::release(st, &id)).await?))
}

async fn whatif(State(s): State<AppState>, text: String) -> Reply<ondt_core::path::ProvisionReport> {
    let req: ProvisionRequest = body(&text)?;
    Ok(ok(api::whatif(&s.snapshot(), &req, &s.0.analytics)?))
}

async fn commit(State(s): State<AppState>, Path(id): Path<String>, text: String) -> Reply<api::CommitOutcome> {
    let req: CommitRequest = body(&text)?;
    let analytics = s.0.analytics.clone();
    let out = s.mutate(move |st| api::commit(st, &id, &req, &analytics)).await?;
    Ok(Json(StatusCode::CREATED, out))
}

async fn backups(
    State(s): State<AppState>,
    Path(id): Path<String>,
) -> Reply<Vec<ondt_core::store::BackupRoute>> {
    Ok(ok(s.mutate(move |st| api::compute_backups(st, &id)).await?))
}

async fn activate(
    State(s): State<AppState>,
    Path((id, index)): Path<(String, usize)>,
) -> Reply<ondt_core::store::Lightpath> {
    Ok(ok(s.mutate(move |st| api::restore_on_backup(st, &id, index)).await?))
}

async fn telemetry(State(s): State<AppState>, text: String) -> Reply<api::IngestOutcome> {
    let samples = api::parse_telemetry_body(&text)?;
    Ok(ok(s.mutate(move |st| api::ingest_samples(st, &samples)).await?))
}

async fn history(State(s): State<AppState>, Path(id): Path<String>) -> Reply<api::HistoryDoc> {
    Ok(ok(api::history(&s.snapshot(), &id)?))
}

#[derive(Deserialize)]
struct ForecastQuery {
    threshold_db: Option<f64>,
}

async fn forecast(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ForecastQuery>,
) -> Reply<ondt_core::telemetry::MarginForecast> {
    Ok(ok(api::margin_forecast(&s.snapshot(), &id, q.threshold_db)?))
}

async fn faults(State(s): State<AppState>) -> Reply<ondt_core::telemetry::FaultHypothesis> {
    Ok(ok(api::faults(&s.snapshot(), &s.0.analytics)?))
}

async fn span_loss(State(s): State<AppState>, text: String) -> Reply<api::SpanLossReport> {
    let req: SpanLossRequest = body(&text)?;
    Ok(ok(api::span_loss(&s.snapshot(), &req)?))
}

async fn catalog(State(s): State<AppState>) -> Json<ondt_core::trx::TrxCatalog> {
    ok(api::trx_catalog(&s.snapshot()))
}

#[derive(Deserialize)]
struct DomainQuery {
    lp: Option<String>,
    timestamp: Option<f64>,
}

async fn domains(State(s): State<AppState>, Query(q): Query<DomainQuery>) -> Reply<api::DomainExport> {
    Ok(ok(api::domains_qot(&s.snapshot(), q.lp.as_deref(), q.timestamp)?))
}

#[derive(Deserialize)]
struct ReportQuery {
    lp: Option<String>,
}

async fn report(State(s): State<AppState>, Query(q): Query<ReportQuery>) -> Reply<api::QotReport> {
    Ok(ok(api::report(&s.snapshot(), q.lp.as_deref())?))
}

async fn schema_index() -> Json<serde_json::Value> {
    ok(api::schema_index())
}

async fn schema(Path(name): Path<String>) -> Reply<serde_json::Value> {
    Ok(ok(api::schema(&name)?))
}

async fn not_found() -> ApiError {
    ApiError::new("NotFound", "no such endpoint")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/topology", get(topology))
        .route("/lightpaths", get(list_lightpaths).post(provision))
        .route("/lightpaths/{id}", get(get_lightpath).delete(release))
        .route("/lightpaths/{id}/commit", post(commit))
        .route("/lightpaths/{id}/backups", post(backups))
        .route("/lightpaths/{id}/backups/{index}/activate", post(activate))
        .route("/lightpaths/{id}/history", get(history))
        .route("/lightpaths/{id}/margin-forecast", get(forecast))
        .route("/whatif", post(whatif))
        .route("/telemetry", post(telemetry))
        .route("/faults", get(faults))
        .route("/scenario/span-loss", post(span_loss))
        .route("/trx-catalog", get(catalog))
        .route("/domains/qot", get(domains))
        .route("/report", get(report))
        .route("/schema", get(schema_index))
        .route("/schema/{name}", get(schema))
        .fallback(not_found)
        .with_state(state)
}

/// Binds, loads the twin and serves until Ctrl-C. Both the bind and the
/// load happen before any request is accepted.
pub async fn serve(config: Config) -> Result<(), ApiError> {
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| ApiError::new("Io", format!("cannot bind {addr}: {e}")))?;
    let store = config.open_store()?;
    tracing::info!(%addr, lightpaths = store.lightpaths().count(), "serving");
    let app = router(AppState::new(store, Some(config.data()), config.analytics.clone()));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ApiError::new("Io", e.to_string()))
}
