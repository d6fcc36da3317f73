//! Physical-layer evaluator: element-by-element power propagation and
//! GN-model ASE/NLI accumulation into a line GSNR.
//!
//! Everything here is a pure function of its inputs.

mod elements;
mod noise;
mod plan;
mod power;
mod snr;

pub use elements::{Edfa, Element, ElementKind, FiberSpan, LossOffset, RoadmNode};
pub use noise::{ase_power_w, ase_snr, nli_psd, nli_snr, NliChannel};
pub use plan::{Channel, ChannelPlan, DEFAULT_REFERENCE_BANDWIDTH_GHZ, SUPPORTED_BAND_THZ};
pub use power::{propagate_power, AppliedGain, GainLimit, LineControl, PowerControl, PowerProfile};
pub use snr::{
    evaluate_link, fold_contributions, link_gsnr, ElementSnr, LinkEvaluation, LinkSnrBreakdown,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("required gain {required_db:.2} dB outside amplifier range [{min_db}, {max_db}] dB")]
    GainOutOfRange {
        required_db: f64,
        min_db: f64,
        max_db: f64,
    },
    #[error("channel plan is empty")]
    EmptyPlan,
    #[error("invalid channel plan: {0}")]
    InvalidPlan(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::GainOutOfRange { .. } => "GainOutOfRange",
            EngineError::EmptyPlan => "EmptyPlan",
            EngineError::InvalidPlan(_) => "InvalidPlan",
            EngineError::InvalidElement(_) => "InvalidElement",
        }
    }
}
