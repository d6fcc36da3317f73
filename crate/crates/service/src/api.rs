//! Operations behind every endpoint and subcommand.
//!
//! Handlers and the CLI both call these and serialize the result the same
//! way, which is what keeps their outputs identical.

use ondt_core::path::{
    activate_backup, commit_provision, precompute_backups, whatif_provision, BackupOptions, ProvisionReport,
    ProvisionRequest, WhatifOptions,
};
use ondt_core::store::{
    BackupRoute, HistoryLine, Lightpath, LightpathsDoc, LpId, LpState, NodeId, PendingWrite, QotRecord, QotSource,
    Topology, TwinStore,
};
use ondt_core::telemetry::{
    export_domains, fault_evidence, ingest, localize_fault, predict_margin_crossing, simulate_span_loss, DomainQot,
    FaultHypothesis, MarginForecast, SpanLossStep, TelemetrySample,
};
use ondt_core::trx::TrxCatalog;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Analytics;
use crate::error::ApiError;

/// A result plus the documents the mutation requires on disk.
#[derive(Debug)]
pub struct Mutation<T> {
    pub value: T,
    pub pending: PendingWrite,
}

fn registry_write(store: &TwinStore, history: Vec<HistoryLine>) -> PendingWrite {
    PendingWrite {
        topology: None,
        lightpaths: Some(store.lightpaths_json()),
        history_append: history,
    }
}

pub fn topology(store: &TwinStore) -> Topology {
    store.topology().clone()
}

pub fn lightpaths(store: &TwinStore) -> LightpathsDoc {
    store.lightpaths_doc()
}

pub fn lightpath(store: &TwinStore, id: &str) -> Result<Lightpath, ApiError> {
    Ok(store.lightpath(id)?.clone())
}

pub fn trx_catalog(store: &TwinStore) -> TrxCatalog {
    store.catalog().clone()
}

pub fn whatif(store: &TwinStore, request: &ProvisionRequest, analytics: &Analytics) -> Result<ProvisionReport, ApiError> {
    let options = WhatifOptions {
        k_routes: analytics.k_routes,
    };
    Ok(whatif_provision(store, request, options)?)
}

/// Body of `POST /lightpaths/{id}/commit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CommitRequest {
    pub report: ProvisionReport,
    /// Time stamped on the computed history record; defaults to 0.
    #[serde(default)]
    pub timestamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CommitOutcome {
    pub lp_id: LpId,
    pub revision: u64,
    pub lightpath: Lightpath,
    pub record: QotRecord,
}

/// Commits a what-if report after checking that it is current and that it
/// is exactly what the store would produce for its request now.
pub fn commit(
    store: &mut TwinStore,
    id: &str,
    body: &CommitRequest,
    analytics: &Analytics,
) -> Result<Mutation<CommitOutcome>, ApiError> {
    let report = &body.report;
    if report.proposed_id.as_str() != id {
        return Err(ApiError::new(
            "InvalidRequest",
            format!("report proposes {}, not {id}", report.proposed_id),
        )
        .at("/report/proposed_id"));
    }
    if report.revision != store.revision() {
        return Err(ondt_core::path::PathError::StaleReport {
            report_revision: report.revision,
            store_revision: store.revision(),
        }
        .into());
    }
    let fresh = whatif(store, &report.request, analytics)?;
    if &fresh != report {
        return Err(ApiError::new(
            "ReportMismatch",
            "report differs from the what-if result for its request",
        )
        .at("/report"));
    }
    let lp_id = commit_provision(store, &fresh, body.timestamp.unwrap_or(0.0))?;
    let record = store
        .history(lp_id.as_str())?
        .last()
        .cloned()
        .expect("commit appends a computed record");
    let outcome = CommitOutcome {
        lightpath: store.lightpath(lp_id.as_str())?.clone(),
        revision: store.revision(),
        record: record.clone(),
        lp_id: lp_id.clone(),
    };
    let pending = registry_write(store, vec![HistoryLine { lp_id, record }]);
    Ok(Mutation { value: outcome, pending })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ProvisionOutcome {
    /// Set when the request was accepted and committed.
    pub lp_id: Option<LpId>,
    pub report: ProvisionReport,
}

/// What-if followed by commit when accepted.
pub fn provision(
    store: &mut TwinStore,
    request: &ProvisionRequest,
    timestamp: f64,
    analytics: &Analytics,
) -> Result<Mutation<ProvisionOutcome>, ApiError> {
    let report = whatif(store, request, analytics)?;
    if !report.is_accepted() {
        return Ok(Mutation {
            value: ProvisionOutcome { lp_id: None, report },
            pending: PendingWrite::default(),
        });
    }
    let body = CommitRequest {
        report: report.clone(),
        timestamp: Some(timestamp),
    };
    let committed = commit(store, report.proposed_id.as_str(), &body, analytics)?;
    Ok(Mutation {
        value: ProvisionOutcome {
            lp_id: Some(committed.value.lp_id),
            report,
        },
        pending: committed.pending,
    })
}

pub fn release(store: &mut TwinStore, id: &str) -> Result<Mutation<Lightpath>, ApiError> {
    let lp = store.release_lightpath(id)?;
    Ok(Mutation {
        pending: registry_write(store, Vec::new()),
        value: lp,
    })
}

pub fn compute_backups(store: &mut TwinStore, id: &str) -> Result<Mutation<Vec<BackupRoute>>, ApiError> {
    let backups = precompute_backups(store, id, BackupOptions::default())?;
    Ok(Mutation {
        pending: registry_write(store, Vec::new()),
        value: backups,
    })
}

pub fn restore_on_backup(store: &mut TwinStore, id: &str, index: usize) -> Result<Mutation<Lightpath>, ApiError> {
    let lp = activate_backup(store, id, index)?;
    Ok(Mutation {
        pending: registry_write(store, Vec::new()),
        value: lp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct IngestedRecord {
    pub lp_id: LpId,
    pub record: QotRecord,
    pub state: LpState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct IngestOutcome {
    pub revision: u64,
    pub records: Vec<IngestedRecord>,
}

/// Accepts one sample object or an array of them.
pub fn parse_telemetry_body(text: &str) -> Result<Vec<TelemetrySample>, ApiError> {
    if text.trim_start().starts_with('[') {
        Ok(ondt_core::doc::parse(text)?)
    } else {
        Ok(vec![ondt_core::doc::parse(text)?])
    }
}

/// Ingests all samples or none: the first failure leaves the store as it was
/// and names the offending sample in the error path.
pub fn ingest_samples(store: &mut TwinStore, samples: &[TelemetrySample]) -> Result<Mutation<IngestOutcome>, ApiError> {
    let mut work = store.clone();
    let mut records = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let record = ingest(&mut work, s).map_err(|e| {
            let e = ApiError::from(e);
            let inner = match (e.path.clone(), e.code.as_str()) {
                (Some(p), _) => p,
                (None, "InvalidBer") => "/pre_fec_ber".into(),
                (None, _) => String::new(),
            };
            e.at(format!("/{i}{inner}"))
        })?;
        let state = work.lightpath(s.lp_id.as_str())?.state;
        records.push(IngestedRecord {
            lp_id: s.lp_id.clone(),
            record,
            state,
        });
    }
    let changed = work.revision() != store.revision();
    *store = work;
    let history = records
        .iter()
        .map(|r| HistoryLine {
            lp_id: r.lp_id.clone(),
            record: r.record.clone(),
        })
        .collect();
    let pending = PendingWrite {
        topology: None,
        lightpaths: changed.then(|| store.lightpaths_json()),
        history_append: history,
    };
    Ok(Mutation {
        value: IngestOutcome {
            revision: store.revision(),
            records,
        },
        pending,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct HistoryDoc {
    pub lp_id: LpId,
    pub records: Vec<QotRecord>,
}

pub fn history(store: &TwinStore, id: &str) -> Result<HistoryDoc, ApiError> {
    Ok(HistoryDoc {
        lp_id: LpId::from(id),
        records: store.history(id)?.to_vec(),
    })
}

/// Forecast against `threshold_db`, or against the degraded threshold of the
/// lightpath's service class when absent.
pub fn margin_forecast(store: &TwinStore, id: &str, threshold_db: Option<f64>) -> Result<MarginForecast, ApiError> {
    let lp = store.lightpath(id)?;
    let threshold = threshold_db.unwrap_or_else(|| store.policy().threshold_db(&lp.service_class));
    Ok(predict_margin_crossing(store.history(id)?, threshold)?)
}

pub fn faults(store: &TwinStore, analytics: &Analytics) -> Result<FaultHypothesis, ApiError> {
    let (degraded, healthy) = fault_evidence(store, analytics.detect_window, analytics.detect_delta_db);
    Ok(localize_fault(store, &degraded, &healthy)?)
}

/// Body of `POST /scenario/span-loss`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpanLossRequest {
    pub lp_id: LpId,
    /// Extra loss inserted into every span of the route, one step per entry.
    pub added_loss_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SpanLossReport {
    pub lp_id: LpId,
    pub steps: Vec<SpanLossStep>,
}

pub fn span_loss(store: &TwinStore, request: &SpanLossRequest) -> Result<SpanLossReport, ApiError> {
    Ok(SpanLossReport {
        lp_id: request.lp_id.clone(),
        steps: simulate_span_loss(store, request.lp_id.as_str(), &request.added_loss_db)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DomainExport {
    pub segments: Vec<DomainQot>,
}

/// Per-operator segment GSNRs of `lp` (or of every lit lightpath), stamped
/// with `timestamp` or with the lightpath's latest sample time.
pub fn domains_qot(store: &TwinStore, lp: Option<&str>, timestamp: Option<f64>) -> Result<DomainExport, ApiError> {
    let ids: Vec<LpId> = match lp {
        Some(id) => vec![store.lightpath(id)?.id.clone()],
        None => store
            .lightpaths()
            .filter(|l| l.state.is_lit())
            .map(|l| l.id.clone())
            .collect(),
    };
    let mut segments = Vec::new();
    for id in ids {
        let at = timestamp.unwrap_or_else(|| {
            store
                .history(id.as_str())
                .ok()
                .and_then(|h| h.last())
                .map_or(0.0, |r| r.timestamp)
        });
        segments.extend(export_domains(store, id.as_str(), at)?);
    }
    Ok(DomainExport { segments })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LpQot {
    pub lp_id: LpId,
    pub src: NodeId,
    pub dst: NodeId,
    pub trx: String,
    pub service_class: String,
    pub state: LpState,
    pub hops: usize,
    pub target_margin_db: f64,
    /// Model prediction at the current load; absent for dark lightpaths.
    pub computed: Option<QotRecord>,
    /// Most recent telemetry-derived record.
    pub measured: Option<QotRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct QotReport {
    pub revision: u64,
    pub lightpaths: Vec<LpQot>,
}

pub fn report(store: &TwinStore, lp: Option<&str>) -> Result<QotReport, ApiError> {
    if let Some(id) = lp {
        store.lightpath(id)?;
    }
    let eval = store.evaluate()?;
    let mut out = Vec::new();
    for l in store.lightpaths().filter(|l| lp.is_none_or(|id| l.id == id)) {
        let computed = match eval.get(l.id.as_str()) {
            Some(_) => Some(store.computed_record(l.id.as_str(), &eval, 0.0)?),
            None => None,
        };
        let measured = store
            .history(l.id.as_str())?
            .iter()
            .rev()
            .find(|r| r.source == QotSource::Telemetry)
            .cloned();
        out.push(LpQot {
            lp_id: l.id.clone(),
            src: l.src.clone(),
            dst: l.dst.clone(),
            trx: l.trx.clone(),
            service_class: l.service_class.clone(),
            state: l.state,
            hops: l.route.len(),
            target_margin_db: l.target_margin_db,
            computed,
            measured,
        });
    }
    Ok(QotReport {
        revision: store.revision(),
        lightpaths: out,
    })
}

/// Schemas of the request and response bodies defined here.
pub fn service_schemas() -> Vec<(String, Value)> {
    use ondt_core::schema::named;
    vec![
        named::<ApiError>("api-error"),
        named::<CommitOutcome>("commit-outcome"),
        named::<CommitRequest>("commit-request"),
        named::<DomainExport>("domain-export"),
        named::<HistoryDoc>("history"),
        named::<IngestOutcome>("ingest-outcome"),
        named::<ProvisionOutcome>("provision-outcome"),
        named::<QotReport>("qot-report"),
        named::<SpanLossReport>("span-loss-report"),
        named::<SpanLossRequest>("span-loss-request"),
    ]
}

/// Every published schema: the core documents plus the service bodies.
pub fn schemas() -> Vec<(String, Value)> {
    let mut all = ondt_core::schema::core_schemas();
    all.extend(service_schemas());
    all.sort_by(|a, b| a.0.cmp(&b.0));
    all
}

pub fn schema_index() -> Value {
    let map: serde_json::Map<String, Value> = schemas().into_iter().collect();
    serde_json::json!({
        "version": ondt_core::schema::SCHEMA_VERSION,
        "schemas": map,
    })
}

pub fn schema(name: &str) -> Result<Value, ApiError> {
    schemas()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| ApiError::new("UnknownSchema", format!("no schema named {name}")))
}

/// Canonical response body: pretty JSON with a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    ondt_core::doc::to_pretty(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn committed_schemas_match_types() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas");
        let drifted = ondt_core::schema::check_committed(&dir, &service_schemas()).unwrap();
        assert!(drifted.is_empty(), "stale schemas {drifted:?}; rerun with ONDT_UPDATE_SCHEMAS=1");
    }

    #[test]
    fn schema_names_are_unique() {
        let names: std::collections::BTreeSet<String> = schemas().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), schemas().len());
    }
}
