//! Optical network digital twin.
//!
//! Lightpath-level quality of transmission from a GN-model line evaluator,
//! a transceiver BER/SNR model, a lightpath registry with provisioning and
//! backup computation, and telemetry analytics.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with range errors.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod doc;
pub mod fixtures;
pub mod gn;
pub mod path;
pub mod schema;
pub mod store;
pub mod telemetry;
pub mod trx;
pub mod units;
