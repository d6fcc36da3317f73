use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::TelemetryError;
use crate::store::{LpId, NodeId, TwinStore};
use crate::trx::{QotPoint, TrxType};
use crate::units::{db_to_lin, inverse_sum, lin_to_db};

/// What one operator discloses about its segment of a lightpath: the ends
/// and the segment GSNR. Nothing about the line itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DomainQot {
    pub operator_id: String,
    pub lp_id: LpId,
    pub src: NodeId,
    pub dst: NodeId,
    pub gsnr_db: f64,
    pub timestamp: f64,
}

/// Splits a lightpath's route into maximal runs of links with the same
/// operator and reports each run's accumulated GSNR.
pub fn export_domains(store: &TwinStore, lp_id: &str, timestamp: f64) -> Result<Vec<DomainQot>, TelemetryError> {
    let lp = store.lightpath(lp_id)?;
    let nodes = store.route_nodes(lp)?;
    let path = store.effective_gsnr(lp_id)?;
    let mut out: Vec<(DomainQot, Vec<f64>)> = Vec::new();
    for (k, hop) in path.hops.iter().enumerate() {
        let operator = &store.topology().link(hop.link.as_str()).expect("route link").operator_id;
        match out.last_mut() {
            Some((seg, gsnrs)) if seg.operator_id == *operator => {
                seg.dst = nodes[k + 1].clone();
                gsnrs.push(hop.breakdown.gsnr);
            }
            _ => out.push((
                DomainQot {
                    operator_id: operator.clone(),
                    lp_id: lp.id.clone(),
                    src: nodes[k].clone(),
                    dst: nodes[k + 1].clone(),
                    gsnr_db: 0.0,
                    timestamp,
                },
                vec![hop.breakdown.gsnr],
            )),
        }
    }
    Ok(out
        .into_iter()
        .map(|(mut seg, gsnrs)| {
            seg.gsnr_db = lin_to_db(inverse_sum(gsnrs));
            seg
        })
        .collect())
}

/// End-to-end operating point from per-domain GSNRs alone.
pub fn compose_domains(segments: &[DomainQot], trx: &TrxType) -> Result<QotPoint, TelemetryError> {
    if segments.is_empty() {
        return Err(TelemetryError::InvalidSegments("no segments".into()));
    }
    for (i, pair) in segments.windows(2).enumerate() {
        if pair[0].dst != pair[1].src {
            return Err(TelemetryError::NonContiguousSegments {
                index: i + 1,
                expected: pair[0].dst.clone(),
                found: pair[1].src.clone(),
            });
        }
    }
    if let Some(bad) = segments.iter().find(|s| !s.gsnr_db.is_finite()) {
        return Err(TelemetryError::InvalidSegments(format!(
            "segment {}→{} has non-finite GSNR",
            bad.src, bad.dst
        )));
    }
    let gsnr = inverse_sum(segments.iter().map(|s| db_to_lin(s.gsnr_db)));
    Ok(QotPoint::evaluate(trx, lin_to_db(gsnr), None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::path::{commit_provision, whatif_provision, ProvisionRequest, WhatifOptions};

    fn seg(op: &str, src: &str, dst: &str, gsnr_db: f64) -> DomainQot {
        DomainQot {
            operator_id: op.into(),
            lp_id: "LP1".into(),
            src: src.into(),
            dst: dst.into(),
            gsnr_db,
            timestamp: 0.0,
        }
    }

    #[test]
    fn arithmetic() {
        let trx = fixtures::ring_store().catalog().as_slice()[0].clone();
        let one = compose_domains(&[seg("a", "X", "Y", 18.0)], &trx).unwrap();
        assert!((one.gsnr_db - 18.0).abs() < 1e-12);
        let two = compose_domains(&[seg("a", "X", "Y", 20.0), seg("b", "Y", "Z", 20.0)], &trx).unwrap();
        assert!((two.gsnr_db - 16.989_700_043_360_19).abs() < 1e-9);
        let err = compose_domains(&[seg("a", "X", "Y", 20.0), seg("b", "W", "Z", 20.0)], &trx).unwrap_err();
        assert_eq!(err.code(), "NonContiguousSegments");
        assert!(compose_domains(&[], &trx).is_err());
    }

    #[test]
    fn split_at_demarcation_equals_whole_path() {
        let mut store = fixtures::two_operator_store();
        let r = whatif_provision(&store, &ProvisionRequest::new("X1-T", "Y2-T", 100.0, 0.0), WhatifOptions::default())
            .unwrap();
        assert!(r.is_accepted(), "{:?}", r.verdict);
        let id = commit_provision(&mut store, &r, 0.0).unwrap();
        let segments = export_domains(&store, id.as_str(), 5.0).unwrap();
        let ops: Vec<_> = segments.iter().map(|s| s.operator_id.as_str()).collect();
        assert_eq!(ops, vec!["opA", "opB"]);
        assert_eq!(segments[0].dst, "X3");
        let trx = store.trx_of(store.lightpath(id.as_str()).unwrap()).unwrap();
        let e2e = compose_domains(&segments, trx).unwrap();
        let whole = store.effective_gsnr(id.as_str()).unwrap().gsnr;
        assert!((db_to_lin(e2e.gsnr_db) - whole).abs() / whole < 1e-12);
        let text = serde_json::to_string(&segments[0]).unwrap();
        assert!(!text.contains("elements") && !text.contains("length"));
    }
}
