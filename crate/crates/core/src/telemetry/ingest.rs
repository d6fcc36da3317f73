use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::TelemetryError;
use crate::doc::{self, SchemaViolation};
use crate::store::{LpId, QotRecord, QotSource, TwinStore};
use crate::trx::{estimate_gsnr_from_ber, margin, q_factor, TrxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Emulated,
    Replayed,
    Field,
}

/// One line of `telemetry.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TelemetrySample {
    pub lp_id: LpId,
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    pub pre_fec_ber: f64,
    pub rx_power_dbm: f64,
    pub source: SampleSource,
}

/// Parses newline-delimited samples; blank lines are skipped. Errors carry
/// the zero-based line number as the first pointer segment.
pub fn parse_samples(text: &str) -> Result<Vec<TelemetrySample>, SchemaViolation> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            doc::parse::<TelemetrySample>(line)
                .map_err(|e| SchemaViolation::new(format!("/{n}{}", e.path), format!("line {}: {}", n + 1, e.message)))
        })
        .collect()
}

/// Backs the GSNR out of a measured BER and appends it to the lightpath's
/// history, moving the lightpath between active and degraded by policy.
///
/// A BER the transceiver curve cannot produce is kept as a flagged record
/// without GSNR or margin and leaves the state unchanged.
pub fn ingest(store: &mut TwinStore, sample: &TelemetrySample) -> Result<QotRecord, TelemetryError> {
    let lp = store.lightpath(sample.lp_id.as_str())?;
    if !lp.state.is_in_service() {
        return Err(TelemetryError::NotInService {
            lp: lp.id.clone(),
            state: lp.state,
        });
    }
    let q_db = q_factor(sample.pre_fec_ber)?;
    if !sample.timestamp.is_finite() {
        return Err(SchemaViolation::new("/timestamp", "timestamp must be finite").into());
    }
    let trx = store.trx_of(lp)?;
    let mut flags = Vec::new();
    if trx.check_rx_power(sample.rx_power_dbm).is_err() {
        flags.push("rx_power_out_of_range");
    }
    let estimate = match estimate_gsnr_from_ber(trx, sample.pre_fec_ber) {
        Ok(g) => Some((g, margin(trx, g)?)),
        Err(TrxError::NoIntersection { .. }) => {
            flags.push("no_intersection");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let next_state = estimate.map(|(_, m)| store.policy().state_for(&lp.service_class, m));
    let record = QotRecord {
        timestamp: sample.timestamp,
        ber: sample.pre_fec_ber,
        gsnr_est_db: estimate.map(|(g, _)| g),
        margin_db: estimate.map(|(_, m)| m),
        q_db,
        rx_power_dbm: Some(sample.rx_power_dbm),
        source: QotSource::Telemetry,
        flag: (!flags.is_empty()).then(|| flags.join(",")),
    };
    let id = sample.lp_id.as_str();
    store.append_record(id, record.clone())?;
    if let Some(state) = next_state {
        store.set_state(id, state)?;
    }
    Ok(record)
}
