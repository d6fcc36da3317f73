use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{detect_degradation, EventKind, TelemetryError};
use crate::store::{LinkId, LpId, LpState, TwinStore};

/// Score deducted per healthy lightpath crossing a link.
pub const HEALTHY_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LinkScore {
    pub link: LinkId,
    /// In [0, 1].
    pub score: f64,
    pub degraded_count: usize,
    pub healthy_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FaultHypothesis {
    /// Every link on a degraded route, best candidate first.
    pub ranked: Vec<LinkScore>,
    pub evidence: Vec<LpId>,
    /// Healthy lightpaths crossing at least one ranked link.
    pub healthy_witnesses: Vec<LpId>,
    pub ticket_text: String,
}

impl FaultHypothesis {
    pub fn top(&self, n: usize) -> impl Iterator<Item = &LinkId> {
        self.ranked.iter().take(n).map(|s| &s.link)
    }
}

/// Ranks links by how well they explain the degraded set.
///
/// `score = degraded_on_link / |degraded| − HEALTHY_PENALTY · healthy_on_link`,
/// floored at 0. Ties go to fewer healthy witnesses, then to link id. An
/// empty degraded set yields an empty ranking.
pub fn localize_fault(
    store: &TwinStore,
    degraded: &[LpId],
    healthy: &[LpId],
) -> Result<FaultHypothesis, TelemetryError> {
    let routes = |ids: &[LpId]| -> Result<Vec<(LpId, BTreeSet<LinkId>)>, TelemetryError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for id in ids {
            if seen.insert(id.clone()) {
                out.push((id.clone(), store.lightpath(id.as_str())?.route.iter().cloned().collect()));
            }
        }
        Ok(out)
    };
    let bad = routes(degraded)?;
    let good = routes(healthy)?;

    let mut counts: BTreeMap<LinkId, (usize, usize)> = BTreeMap::new();
    for (_, links) in &bad {
        for l in links {
            counts.entry(l.clone()).or_default().0 += 1;
        }
    }
    let mut witnesses = BTreeSet::new();
    for (id, links) in &good {
        for l in links {
            if let Some(c) = counts.get_mut(l) {
                c.1 += 1;
                witnesses.insert(id.clone());
            }
        }
    }
    let n = bad.len() as f64;
    let mut ranked: Vec<LinkScore> = counts
        .into_iter()
        .map(|(link, (d, h))| LinkScore {
            link,
            score: (d as f64 / n - HEALTHY_PENALTY * h as f64).max(0.0),
            degraded_count: d,
            healthy_count: h,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.healthy_count.cmp(&b.healthy_count))
            .then_with(|| a.link.cmp(&b.link))
    });
    let ticket_text = match ranked.first() {
        None => "No degraded lightpaths; nothing to localize.".to_string(),
        Some(top) => {
            let hits: Vec<String> = ranked
                .iter()
                .take_while(|s| s.score == top.score && s.healthy_count == top.healthy_count)
                .map(|s| s.link.to_string())
                .collect();
            format!(
                "Suspected fault on {} (score {:.2}): crossed by {} of {} degraded lightpaths, {} healthy. Evidence: {}.",
                hits.join(" or "),
                top.score,
                top.degraded_count,
                bad.len(),
                top.healthy_count,
                bad.iter().map(|(id, _)| id.as_str()).collect::<Vec<_>>().join(", "),
            )
        }
    };
    Ok(FaultHypothesis {
        ranked,
        evidence: bad.into_iter().map(|(id, _)| id).collect(),
        healthy_witnesses: witnesses.into_iter().collect(),
        ticket_text,
    })
}

/// Degraded and healthy sets read off the store: degraded or failed
/// lightpaths, or active ones whose history shows an uncleared degradation
/// onset, against the remaining active lightpaths.
pub fn fault_evidence(store: &TwinStore, window: usize, delta_db: f64) -> (Vec<LpId>, Vec<LpId>) {
    let mut degraded = Vec::new();
    let mut healthy = Vec::new();
    for lp in store.lightpaths() {
        match lp.state {
            LpState::Degraded | LpState::Failed => degraded.push(lp.id.clone()),
            LpState::Active => {
                let history = store.history(lp.id.as_str()).unwrap_or_default();
                let open = detect_degradation(history, window, delta_db)
                    .last()
                    .is_some_and(|e| e.kind == EventKind::Onset);
                if open {
                    degraded.push(lp.id.clone());
                } else {
                    healthy.push(lp.id.clone());
                }
            }
            LpState::Planned => {}
        }
    }
    (degraded, healthy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::store::Lightpath;

    fn chain_store() -> TwinStore {
        // Ring links stand in for the abstract 1..5 of the examples.
        let mut store = fixtures::ring_store();
        let band = store.topology().band;
        let add = |store: &mut TwinStore, id: &str, src: &str, dst: &str, route: &[&str], slot: u32| {
            store
                .register_lightpath(Lightpath {
                    id: id.into(),
                    src: src.into(),
                    dst: dst.into(),
                    route: route.iter().map(|&l| LinkId::from(l)).collect(),
                    spectrum: band.spectrum(slot, 7),
                    trx: "100G-QPSK-32GBd-SCFEC".into(),
                    target_margin_db: 1.0,
                    service_class: "standard".into(),
                    state: LpState::Active,
                    backups: Vec::new(),
                })
                .unwrap();
        };
        add(&mut store, "A", "T1", "T4", &["R1-R2", "R2-R3", "R3-R4"], 0);
        add(&mut store, "B", "T2", "T5", &["R2-R3", "R3-R4", "R4-R5"], 7);
        add(&mut store, "C", "T5", "T6", &["R5-R6"], 14);
        store
    }

    fn ids(v: &[&str]) -> Vec<LpId> {
        v.iter().map(|&s| LpId::from(s)).collect()
    }

    #[test]
    fn intersection_of_degraded_routes_scores_one() {
        let store = chain_store();
        let h = localize_fault(&store, &ids(&["A", "B"]), &ids(&["C"])).unwrap();
        let top: Vec<_> = h.ranked.iter().filter(|s| s.score == 1.0).map(|s| s.link.as_str()).collect();
        assert_eq!(top, vec!["R2-R3", "R3-R4"]);
        assert!(h.ranked[2..].iter().all(|s| s.score < 1.0));
        assert!(h.healthy_witnesses.is_empty());
        assert!(h.ticket_text.contains("R2-R3 or R3-R4"), "{}", h.ticket_text);
    }

    #[test]
    fn healthy_witness_exonerates_shared_links() {
        let store = chain_store();
        let h = localize_fault(&store, &ids(&["A"]), &ids(&["B"])).unwrap();
        assert_eq!(h.ranked[0].link, "R1-R2");
        assert_eq!(h.ranked[0].score, 1.0);
        assert!(h.ranked[1..].iter().all(|s| s.score == 0.0 && s.healthy_count == 1));
        assert_eq!(h.healthy_witnesses, ids(&["B"]));
    }

    #[test]
    fn empty_degraded_set() {
        let store = chain_store();
        let h = localize_fault(&store, &[], &ids(&["A"])).unwrap();
        assert!(h.ranked.is_empty());
        assert!(matches!(
            localize_fault(&store, &ids(&["Z"]), &[]),
            Err(TelemetryError::Store(_))
        ));
    }

    #[test]
    fn evidence_from_states() {
        let mut store = chain_store();
        store.set_state("B", LpState::Degraded).unwrap();
        let (d, h) = fault_evidence(&store, 3, 1.0);
        assert_eq!(d, ids(&["B"]));
        assert_eq!(h, ids(&["A", "C"]));
    }
}
