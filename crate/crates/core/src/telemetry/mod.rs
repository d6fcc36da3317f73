//! Telemetry ingestion and the analytics built on per-lightpath history.

mod detect;
mod domains;
mod emulator;
mod forecast;
mod ingest;
mod localize;
mod scenario;

pub use detect::{detect_degradation, DegradationEvent, EventKind, DAY_S};
pub use domains::{compose_domains, export_domains, DomainQot};
pub use emulator::{ramp_samples, Emulator, EmulatorConfig};
pub use forecast::{predict_margin_crossing, Crossing, MarginForecast, MIN_FORECAST_SAMPLES};
pub use ingest::{ingest, parse_samples, SampleSource, TelemetrySample};
pub use localize::{fault_evidence, localize_fault, FaultHypothesis, LinkScore, HEALTHY_PENALTY};
pub use scenario::{
    generate_fault_scenario, simulate_span_loss, with_added_span_loss, FaultScenario, FaultScenarioConfig,
    SpanLossStep, DEGRADED_DROP_DB, HEALTHY_DROP_DB, SCENARIO_BURST,
};

use thiserror::Error;

use crate::doc::SchemaViolation;
use crate::path::PathError;
use crate::store::{LpId, LpState, NodeId, StoreError};
use crate::trx::TrxError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelemetryError {
    #[error("{lp} is {state:?}; telemetry is only accepted for in-service lightpaths")]
    NotInService { lp: LpId, state: LpState },
    #[error("need at least {need} margin samples, have {have}")]
    InsufficientHistory { have: usize, need: usize },
    #[error("segment {index} starts at {found}, previous ended at {expected}")]
    NonContiguousSegments { index: usize, expected: NodeId, found: NodeId },
    #[error("invalid segment list: {0}")]
    InvalidSegments(String),
    #[error(transparent)]
    Schema(#[from] SchemaViolation),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Path(#[from] PathError),
}

impl From<TrxError> for TelemetryError {
    fn from(e: TrxError) -> Self {
        TelemetryError::Store(StoreError::Trx(e))
    }
}

impl TelemetryError {
    pub fn code(&self) -> &'static str {
        match self {
            TelemetryError::NotInService { .. } => "NotInService",
            TelemetryError::InsufficientHistory { .. } => "InsufficientHistory",
            TelemetryError::NonContiguousSegments { .. } => "NonContiguousSegments",
            TelemetryError::InvalidSegments(_) => "InvalidSegments",
            TelemetryError::Schema(_) => "SchemaViolation",
            TelemetryError::Store(e) => e.code(),
            TelemetryError::Path(e) => e.code(),
        }
    }
}
