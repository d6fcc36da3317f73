use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::EngineError;

/// Frequency range accepted for channel centers (C+L band with guard).
pub const SUPPORTED_BAND_THZ: (f64, f64) = (184.0, 197.5);

pub const DEFAULT_REFERENCE_BANDWIDTH_GHZ: f64 = 12.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Channel {
    pub center_thz: f64,
    pub symbol_rate_gbd: f64,
    pub launch_power_dbm: f64,
}

impl Channel {
    pub fn new(center_thz: f64, symbol_rate_gbd: f64, launch_power_dbm: f64) -> Self {
        Channel {
            center_thz,
            symbol_rate_gbd,
            launch_power_dbm,
        }
    }
}

fn default_reference_bandwidth() -> f64 {
    DEFAULT_REFERENCE_BANDWIDTH_GHZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ChannelPlan {
    pub channels: Vec<Channel>,
    /// Bandwidth used to express OSNR (0.1 nm by default).
    #[serde(default = "default_reference_bandwidth")]
    pub reference_bandwidth_ghz: f64,
}

impl ChannelPlan {
    pub fn new(channels: Vec<Channel>) -> Self {
        ChannelPlan {
            channels,
            reference_bandwidth_ghz: DEFAULT_REFERENCE_BANDWIDTH_GHZ,
        }
    }

    pub fn single(channel: Channel) -> Self {
        Self::new(vec![channel])
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Checks the band and the `|f_i − f_j| ≥ (R_i + R_j)/2` spacing rule.
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.channels.is_empty() {
            return Err(EngineError::EmptyPlan);
        }
        let (lo, hi) = SUPPORTED_BAND_THZ;
        for (i, ch) in self.channels.iter().enumerate() {
            if !(ch.center_thz >= lo && ch.center_thz <= hi) {
                return Err(EngineError::InvalidPlan(format!(
                    "channel {i} at {} THz outside supported band",
                    ch.center_thz
                )));
            }
            if !(ch.symbol_rate_gbd > 0.0 && ch.symbol_rate_gbd.is_finite()) {
                return Err(EngineError::InvalidPlan(format!(
                    "channel {i} symbol rate must be > 0"
                )));
            }
            if !ch.launch_power_dbm.is_finite() {
                return Err(EngineError::InvalidPlan(format!(
                    "channel {i} launch power must be finite"
                )));
            }
        }
        let mut order: Vec<usize> = (0..self.channels.len()).collect();
        order.sort_by(|&a, &b| self.channels[a].center_thz.total_cmp(&self.channels[b].center_thz));
        for pair in order.windows(2) {
            let (a, b) = (&self.channels[pair[0]], &self.channels[pair[1]]);
            let spacing_ghz = (b.center_thz - a.center_thz) * 1e3;
            let needed = (a.symbol_rate_gbd + b.symbol_rate_gbd) / 2.0;
            if spacing_ghz + 1e-9 < needed {
                return Err(EngineError::InvalidPlan(format!(
                    "channels {} and {} overlap ({spacing_ghz:.3} GHz < {needed:.3} GHz)",
                    pair[0], pair[1]
                )));
            }
        }
        if !(self.reference_bandwidth_ghz > 0.0) {
            return Err(EngineError::InvalidPlan(
                "reference bandwidth must be > 0".into(),
            ));
        }
        Ok(())
    }
}
