use std::collections::HashSet;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{TrxError, TrxType};
use crate::doc::{self, SchemaViolation};

use crate::fixtures::DEFAULT_CATALOG;

/// Immutable list of transceiver types, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(transparent)]
pub struct TrxCatalog(Vec<TrxType>);

impl TrxCatalog {
    pub fn new(types: Vec<TrxType>) -> Result<Self, SchemaViolation> {
        if types.is_empty() {
            return Err(SchemaViolation::new("", "catalog is empty"));
        }
        let mut seen = HashSet::new();
        for (i, t) in types.iter().enumerate() {
            if !seen.insert(t.id.as_str()) {
                return Err(SchemaViolation::new(format!("/{i}/id"), format!("duplicate id {}", t.id)));
            }
            t.validate()
                .map_err(|e| SchemaViolation::new(format!("/{i}"), e.to_string()))?;
        }
        Ok(TrxCatalog(types))
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaViolation> {
        Self::new(doc::parse(text)?)
    }

    /// 100G QPSK 32 GBd SC-FEC, 400G 16QAM 64 GBd oFEC, 800G 16QAM 130 GBd.
    pub fn default_generations() -> Self {
        Self::from_json(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    pub fn as_slice(&self) -> &[TrxType] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TrxType> {
        self.0.iter()
    }

    pub fn get(&self, id: &str) -> Result<&TrxType, TrxError> {
        self.0
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| TrxError::UnknownTrx(id.to_string()))
    }

    pub fn to_json(&self) -> String {
        doc::to_pretty(self)
    }
}
