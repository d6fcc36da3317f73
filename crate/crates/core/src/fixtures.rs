//! Shipped scenario corpus: a six-ROADM metro ring, a data-center
//! interconnect mesh and a two-operator chain.

use crate::store::TwinStore;
use crate::trx::TrxCatalog;

pub const RING_TOPOLOGY: &str = include_str!("../fixtures/ring.json");
pub const DCX_MESH_TOPOLOGY: &str = include_str!("../fixtures/dcx_mesh.json");
pub const TWO_OPERATOR_TOPOLOGY: &str = include_str!("../fixtures/two_operator.json");
pub const DEFAULT_CATALOG: &str = include_str!("../fixtures/catalog.json");

/// Fixture names accepted by [`topology`].
pub const NAMES: [&str; 3] = ["ring", "dcx-mesh", "two-operator"];

pub fn topology(name: &str) -> Option<&'static str> {
    match name {
        "ring" => Some(RING_TOPOLOGY),
        "dcx-mesh" => Some(DCX_MESH_TOPOLOGY),
        "two-operator" => Some(TWO_OPERATOR_TOPOLOGY),
        _ => None,
    }
}

fn load(text: &str) -> TwinStore {
    TwinStore::from_topology_json(text, TrxCatalog::default_generations()).expect("shipped fixture is valid")
}

pub fn ring_store() -> TwinStore {
    load(RING_TOPOLOGY)
}

pub fn dcx_mesh_store() -> TwinStore {
    load(DCX_MESH_TOPOLOGY)
}

pub fn two_operator_store() -> TwinStore {
    load(TWO_OPERATOR_TOPOLOGY)
}

/// Demand set provisioned by [`ring_with_lightpaths`]: (src, dst, transceiver).
pub const RING_DEMANDS: [(&str, &str, &str); 12] = [
    ("T1", "T2", "800G-16QAM-130GBd-PFEC"),
    ("T3", "T4", "800G-16QAM-130GBd-PFEC"),
    ("T5", "T6", "800G-16QAM-130GBd-PFEC"),
    ("T2", "T3", "400G-16QAM-64GBd-OFEC"),
    ("T4", "T5", "400G-16QAM-64GBd-OFEC"),
    ("T6", "T1", "400G-16QAM-64GBd-OFEC"),
    ("T1", "T3", "400G-16QAM-64GBd-OFEC"),
    ("T1", "T4", "100G-QPSK-32GBd-SCFEC"),
    ("T2", "T5", "100G-QPSK-32GBd-SCFEC"),
    ("T3", "T6", "100G-QPSK-32GBd-SCFEC"),
    ("T4", "T6", "100G-QPSK-32GBd-SCFEC"),
    ("T5", "T2", "100G-QPSK-32GBd-SCFEC"),
];

/// The ring carrying [`RING_DEMANDS`], each provisioned through what-if and
/// commit with a 1 dB target margin.
pub fn ring_with_lightpaths() -> TwinStore {
    use crate::path::{commit_provision, whatif_provision, ProvisionRequest, WhatifOptions};
    let mut store = ring_store();
    for (src, dst, trx) in RING_DEMANDS {
        let bitrate = store.catalog().get(trx).expect("catalog entry").bitrate_gbps;
        let req = ProvisionRequest {
            allow_trx: Some(vec![trx.to_string()]),
            ..ProvisionRequest::new(src, dst, bitrate, 1.0)
        };
        let report = whatif_provision(&store, &req, WhatifOptions::default()).expect("valid request");
        assert!(report.is_accepted(), "{src}→{dst} {trx}: {:?}", report.verdict);
        commit_provision(&mut store, &report, 0.0).expect("fresh report commits");
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn loaded_ring_covers_every_generation() {
        let store = ring_with_lightpaths();
        assert_eq!(store.lightpaths().count(), 12);
        let used: BTreeSet<&str> = store.lightpaths().map(|lp| lp.trx.as_str()).collect();
        assert_eq!(used.len(), store.catalog().as_slice().len());
    }
}
