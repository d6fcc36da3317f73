//! Routing, spectrum assignment, what-if provisioning with impact analysis,
//! and backup-route precomputation.

mod backup;
mod routes;
mod spectrum;
mod whatif;

pub use backup::{activate_backup, precompute_backups, BackupOptions};
pub use routes::{k_shortest_routes, k_shortest_routes_avoiding, Route, RouteSet};
pub use spectrum::{assign_spectrum, free_mask};
pub use whatif::{
    commit_provision, whatif_provision, CandidateOutcome, CandidateRow, Impact, ProvisionReport,
    ProvisionRequest, RejectReason, Verdict, WhatifOptions,
};

use thiserror::Error;

use crate::store::{NodeId, StoreError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("no route between {src} and {dst}")]
    NoRoute { src: NodeId, dst: NodeId },
    #[error("no contiguous free spectrum of {slots} slots on the route")]
    NoSpectrum { slots: u32 },
    #[error("no transceiver meets the request")]
    NoFeasibleTrx,
    #[error("every candidate breaks the margin of an existing lightpath")]
    MarginViolation { report: Box<ProvisionReport> },
    #[error("report computed at revision {report_revision}, store is at {store_revision}")]
    StaleReport { report_revision: u64, store_revision: u64 },
    #[error("report verdict is reject ({0:?})")]
    NotAccepted(RejectReason),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl PathError {
    pub fn code(&self) -> &'static str {
        match self {
            PathError::NoRoute { .. } => "NoRoute",
            PathError::NoSpectrum { .. } => "NoSpectrum",
            PathError::NoFeasibleTrx => "NoFeasibleTrx",
            PathError::MarginViolation { .. } => "MarginViolation",
            PathError::StaleReport { .. } => "StaleReport",
            PathError::NotAccepted(_) => "NotAccepted",
            PathError::UnknownNode(_) => "UnknownNode",
            PathError::InvalidRequest(_) => "InvalidRequest",
            PathError::Store(e) => e.code(),
        }
    }
}
