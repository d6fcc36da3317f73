use axum::http::StatusCode;
use ondt_core::doc::SchemaViolation;
use ondt_core::path::PathError;
use ondt_core::store::StoreError;
use ondt_core::telemetry::TelemetryError;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// Error body of every failed request. `code` mirrors the module error
/// variant and never changes meaning between versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub code: String,
    pub message: String,
    /// JSON pointer into the request body, when the error concerns one field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_string(),
            message: message.into(),
            path: None,
        }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn status(&self) -> StatusCode {
        match self.code.as_str() {
            "UnknownLightpath" | "UnknownNode" | "UnknownLink" | "UnknownTrx" | "UnknownSchema" | "NotFound" => {
                StatusCode::NOT_FOUND
            }
            "StaleReport" | "SpectrumConflict" | "NotAccepted" | "DuplicateLightpath" | "NotInService" => {
                StatusCode::CONFLICT
            }
            "Io" | "Internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }

    /// True for outcomes that reflect the network rather than a broken
    /// invocation or environment; the CLI exits 1 for these as well.
    pub fn is_domain(&self) -> bool {
        self.status() != StatusCode::INTERNAL_SERVER_ERROR
    }
}

impl From<SchemaViolation> for ApiError {
    fn from(e: SchemaViolation) -> Self {
        ApiError::new("SchemaViolation", e.message).at(e.path)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Schema(v) => v.into(),
            other => ApiError::new(other.code(), other.to_string()),
        }
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Store(s) => s.into(),
            other => ApiError::new(other.code(), other.to_string()),
        }
    }
}

impl From<TelemetryError> for ApiError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::Schema(v) => v.into(),
            TelemetryError::Store(s) => s.into(),
            TelemetryError::Path(p) => p.into(),
            other => ApiError::new(other.code(), other.to_string()),
        }
    }
}
