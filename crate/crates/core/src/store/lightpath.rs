use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{LinkId, LpId, NodeId};

/// Occupied slot: center frequency and total width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Spectrum {
    pub center_thz: f64,
    pub width_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LpState {
    Planned,
    Active,
    Degraded,
    Failed,
}

impl LpState {
    /// Whether the channel carries light and therefore loads its links.
    pub fn is_lit(self) -> bool {
        self != LpState::Failed
    }

    pub fn is_in_service(self) -> bool {
        matches!(self, LpState::Active | LpState::Degraded)
    }
}

/// Alternate route precomputed for restoration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BackupRoute {
    pub route: Vec<LinkId>,
    pub spectrum: Spectrum,
    pub gsnr_db: f64,
    pub margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Lightpath {
    pub id: LpId,
    pub src: NodeId,
    pub dst: NodeId,
    pub route: Vec<LinkId>,
    pub spectrum: Spectrum,
    pub trx: String,
    pub target_margin_db: f64,
    pub service_class: String,
    pub state: LpState,
    #[serde(default)]
    pub backups: Vec<BackupRoute>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum QotSource {
    Computed,
    Telemetry,
}

/// One timestamped QoT sample. `gsnr_est_db` and `margin_db` are absent when
/// the BER had no intersection with the transceiver curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct QotRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    pub ber: f64,
    pub gsnr_est_db: Option<f64>,
    pub margin_db: Option<f64>,
    pub q_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_power_dbm: Option<f64>,
    pub source: QotSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// Margin below which an in-service lightpath counts as degraded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MarginPolicy {
    pub degraded_threshold_db: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_service_class: BTreeMap<String, f64>,
}

impl Default for MarginPolicy {
    fn default() -> Self {
        MarginPolicy {
            degraded_threshold_db: 1.0,
            per_service_class: BTreeMap::new(),
        }
    }
}

impl MarginPolicy {
    pub fn threshold_db(&self, service_class: &str) -> f64 {
        self.per_service_class
            .get(service_class)
            .copied()
            .unwrap_or(self.degraded_threshold_db)
    }

    /// State an in-service lightpath moves to at `margin_db`.
    pub fn state_for(&self, service_class: &str, margin_db: f64) -> LpState {
        if margin_db < self.threshold_db(service_class) {
            LpState::Degraded
        } else {
            LpState::Active
        }
    }
}

/// A released lightpath with the history it had accumulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ArchivedLightpath {
    pub lightpath: Lightpath,
    pub released_at_revision: u64,
}
