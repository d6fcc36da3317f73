use std::collections::HashSet;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{assign_spectrum, k_shortest_routes, PathError, Route};
use crate::store::{Lightpath, LinkId, LpId, LpState, NetworkQot, NodeId, Spectrum, StoreError, TwinStore};
use crate::trx::{margin, trx_preference, QotPoint, TrxError, TrxType};

fn default_service_class() -> String {
    "standard".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ProvisionRequest {
    pub src: NodeId,
    pub dst: NodeId,
    pub requested_bitrate_gbps: f64,
    pub target_margin_db: f64,
    #[serde(default = "default_service_class")]
    pub service_class: String,
    /// Restricts the search to these transceiver ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_trx: Option<Vec<String>>,
}

impl ProvisionRequest {
    pub fn new(src: &str, dst: &str, requested_bitrate_gbps: f64, target_margin_db: f64) -> Self {
        ProvisionRequest {
            src: src.into(),
            dst: dst.into(),
            requested_bitrate_gbps,
            target_margin_db,
            service_class: default_service_class(),
            allow_trx: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct WhatifOptions {
    pub k_routes: usize,
}

impl Default for WhatifOptions {
    fn default() -> Self {
        WhatifOptions { k_routes: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum RejectReason {
    NoRoute,
    NoSpectrum,
    NoFeasibleTrx,
    MarginViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject { reason: RejectReason },
}

/// Effect of the proposed channel on one co-routed lightpath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Impact {
    pub lp_id: LpId,
    pub gsnr_before_db: f64,
    pub gsnr_after_db: f64,
    pub margin_before_db: f64,
    pub margin_after_db: f64,
    pub target_margin_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOutcome {
    Accepted,
    NoSpectrum,
    InsufficientMargin,
    RxPowerOutOfRange,
    MarginViolation,
    EngineLimit,
}

/// One evaluated (route, transceiver) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CandidateRow {
    pub route_index: usize,
    pub route: Vec<LinkId>,
    pub length_km: f64,
    pub trx: String,
    pub spectrum: Option<Spectrum>,
    pub gsnr_db: Option<f64>,
    pub margin_db: Option<f64>,
    pub outcome: CandidateOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ProvisionReport {
    /// Store revision the report was computed against.
    pub revision: u64,
    pub proposed_id: LpId,
    pub request: ProvisionRequest,
    pub verdict: Verdict,
    pub route: Option<Vec<LinkId>>,
    pub spectrum: Option<Spectrum>,
    pub trx: Option<String>,
    pub new_lp: Option<QotPoint>,
    pub impacts: Vec<Impact>,
    pub violated: Vec<LpId>,
    pub candidates: Vec<CandidateRow>,
    pub routes_exhausted: bool,
}

impl ProvisionReport {
    pub fn is_accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    /// Turns a rejection into the matching error.
    pub fn ensure_accepted(self) -> Result<ProvisionReport, PathError> {
        match self.verdict {
            Verdict::Accept => Ok(self),
            Verdict::Reject { reason } => Err(match reason {
                RejectReason::NoRoute => PathError::NoRoute {
                    src: self.request.src.clone(),
                    dst: self.request.dst.clone(),
                },
                RejectReason::NoSpectrum => PathError::NoSpectrum {
                    slots: self.candidates.first().map_or(0, |c| {
                        c.spectrum.map_or(0, |s| (s.width_ghz / 6.25).round() as u32)
                    }),
                },
                RejectReason::NoFeasibleTrx => PathError::NoFeasibleTrx,
                RejectReason::MarginViolation => PathError::MarginViolation { report: Box::new(self) },
            }),
        }
    }
}

fn validate_request(store: &TwinStore, req: &ProvisionRequest) -> Result<(), PathError> {
    if !(req.requested_bitrate_gbps > 0.0) {
        return Err(PathError::InvalidRequest("requested bitrate must be > 0".into()));
    }
    if req.src == req.dst {
        return Err(PathError::InvalidRequest("src and dst must differ".into()));
    }
    if !req.target_margin_db.is_finite() {
        return Err(PathError::InvalidRequest("target margin must be finite".into()));
    }
    for end in [&req.src, &req.dst] {
        if store.topology().node(end.as_str()).is_none() {
            return Err(PathError::UnknownNode(end.clone()));
        }
    }
    Ok(())
}

fn eligible_trx<'a>(store: &'a TwinStore, req: &ProvisionRequest) -> Vec<&'a TrxType> {
    let mut out: Vec<&TrxType> = store
        .catalog()
        .iter()
        .filter(|t| t.bitrate_gbps >= req.requested_bitrate_gbps)
        .filter(|t| req.allow_trx.as_ref().is_none_or(|ids| ids.contains(&t.id)))
        .collect();
    out.sort_by(|a, b| trx_preference(a, b));
    out
}

struct Trial {
    row: CandidateRow,
    new_lp: Option<QotPoint>,
    impacts: Vec<Impact>,
    violated: Vec<LpId>,
}

fn try_candidate(
    store: &TwinStore,
    base: &NetworkQot,
    proposed: &LpId,
    req: &ProvisionRequest,
    route_index: usize,
    route: &Route,
    trx: &TrxType,
) -> Result<Trial, PathError> {
    let slots = store.topology().band.slots_for_baud(trx.baud_gbd);
    let mut row = CandidateRow {
        route_index,
        route: route.links.clone(),
        length_km: route.length_km,
        trx: trx.id.clone(),
        spectrum: None,
        gsnr_db: None,
        margin_db: None,
        outcome: CandidateOutcome::NoSpectrum,
        detail: None,
    };
    let spectrum = match assign_spectrum(store, &route.links, slots) {
        Ok(s) => s,
        Err(PathError::NoSpectrum { .. }) => {
            return Ok(Trial {
                row,
                new_lp: None,
                impacts: Vec::new(),
                violated: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    row.spectrum = Some(spectrum);
    let mut trial = store.clone();
    trial.register_lightpath(Lightpath {
        id: proposed.clone(),
        src: req.src.clone(),
        dst: req.dst.clone(),
        route: route.links.clone(),
        spectrum,
        trx: trx.id.clone(),
        target_margin_db: req.target_margin_db,
        service_class: req.service_class.clone(),
        state: LpState::Planned,
        backups: Vec::new(),
    })?;
    let after = match trial.evaluate() {
        Ok(e) => e,
        Err(StoreError::Engine(e)) => {
            row.outcome = CandidateOutcome::EngineLimit;
            row.detail = Some(e.to_string());
            return Ok(Trial {
                row,
                new_lp: None,
                impacts: Vec::new(),
                violated: Vec::new(),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let path = after.get(proposed.as_str()).expect("proposed lightpath evaluated");
    row.gsnr_db = Some(path.gsnr_db);
    row.margin_db = Some(margin(trx, path.gsnr_db).map_err(StoreError::from)?);
    let new_lp = match QotPoint::evaluate(trx, path.gsnr_db, Some(path.rx_power_dbm)) {
        Ok(p) => p,
        Err(e @ TrxError::RxPowerOutOfRange { .. }) => {
            row.outcome = CandidateOutcome::RxPowerOutOfRange;
            row.detail = Some(e.to_string());
            return Ok(Trial {
                row,
                new_lp: None,
                impacts: Vec::new(),
                violated: Vec::new(),
            });
        }
        Err(e) => return Err(StoreError::from(e).into()),
    };
    if new_lp.margin_db < req.target_margin_db {
        row.outcome = CandidateOutcome::InsufficientMargin;
        return Ok(Trial {
            row,
            new_lp: Some(new_lp),
            impacts: Vec::new(),
            violated: Vec::new(),
        });
    }

    let on_route: HashSet<&LinkId> = route.links.iter().collect();
    let mut impacts = Vec::new();
    let mut violated = Vec::new();
    for lp in store.lightpaths().filter(|lp| lp.state.is_lit()) {
        if !lp.route.iter().any(|l| on_route.contains(l)) {
            continue;
        }
        let before = base.get(lp.id.as_str()).expect("lit lightpath evaluated");
        let now = after.get(lp.id.as_str()).expect("lit lightpath evaluated");
        let lp_trx = store.trx_of(lp)?;
        let impact = Impact {
            lp_id: lp.id.clone(),
            gsnr_before_db: before.gsnr_db,
            gsnr_after_db: now.gsnr_db,
            margin_before_db: margin(lp_trx, before.gsnr_db).map_err(StoreError::from)?,
            margin_after_db: margin(lp_trx, now.gsnr_db).map_err(StoreError::from)?,
            target_margin_db: lp.target_margin_db,
        };
        if impact.margin_after_db < lp.target_margin_db {
            violated.push(lp.id.clone());
        }
        impacts.push(impact);
    }
    row.outcome = if violated.is_empty() {
        CandidateOutcome::Accepted
    } else {
        CandidateOutcome::MarginViolation
    };
    Ok(Trial {
        row,
        new_lp: Some(new_lp),
        impacts,
        violated,
    })
}

/// Simulates adding the requested lightpath without touching the store.
///
/// Candidates are tried route by route (shortest first) and, per route,
/// transceiver by preference; the first that meets its own target without
/// pushing any co-routed lightpath below its target is accepted.
pub fn whatif_provision(
    store: &TwinStore,
    request: &ProvisionRequest,
    options: WhatifOptions,
) -> Result<ProvisionReport, PathError> {
    validate_request(store, request)?;
    let proposed = store.next_lightpath_id();
    let mut report = ProvisionReport {
        revision: store.revision(),
        proposed_id: proposed.clone(),
        request: request.clone(),
        verdict: Verdict::Reject {
            reason: RejectReason::NoRoute,
        },
        route: None,
        spectrum: None,
        trx: None,
        new_lp: None,
        impacts: Vec::new(),
        violated: Vec::new(),
        candidates: Vec::new(),
        routes_exhausted: false,
    };
    let routes = match k_shortest_routes(
        store.topology(),
        request.src.as_str(),
        request.dst.as_str(),
        options.k_routes.max(1),
    ) {
        Ok(set) => set,
        Err(PathError::NoRoute { .. }) => return Ok(report),
        Err(e) => return Err(e),
    };
    report.routes_exhausted = routes.exhausted;
    let trxs = eligible_trx(store, request);
    if trxs.is_empty() {
        report.verdict = Verdict::Reject {
            reason: RejectReason::NoFeasibleTrx,
        };
        return Ok(report);
    }
    let base = store.evaluate()?;
    let mut first_violation: Option<Trial> = None;
    for (ri, route) in routes.routes.iter().enumerate() {
        for trx in &trxs {
            let trial = try_candidate(store, &base, &proposed, request, ri, route, trx)?;
            report.candidates.push(trial.row.clone());
            match trial.row.outcome {
                CandidateOutcome::Accepted => {
                    report.verdict = Verdict::Accept;
                    report.route = Some(trial.row.route);
                    report.spectrum = trial.row.spectrum;
                    report.trx = Some(trial.row.trx);
                    report.new_lp = trial.new_lp;
                    report.impacts = trial.impacts;
                    return Ok(report);
                }
                CandidateOutcome::MarginViolation if first_violation.is_none() => {
                    first_violation = Some(trial);
                }
                _ => {}
            }
        }
    }
    let reason = if let Some(trial) = first_violation {
        report.route = Some(trial.row.route);
        report.spectrum = trial.row.spectrum;
        report.trx = Some(trial.row.trx);
        report.new_lp = trial.new_lp;
        report.impacts = trial.impacts;
        report.violated = trial.violated;
        RejectReason::MarginViolation
    } else if report.candidates.iter().all(|c| c.outcome == CandidateOutcome::NoSpectrum) {
        RejectReason::NoSpectrum
    } else {
        RejectReason::NoFeasibleTrx
    };
    report.verdict = Verdict::Reject { reason };
    Ok(report)
}

/// Registers an accepted report's lightpath as active and records its
/// computed QoT at `timestamp`.
///
/// Checks, in order: verdict, spectrum still free, store revision unchanged.
pub fn commit_provision(store: &mut TwinStore, report: &ProvisionReport, timestamp: f64) -> Result<LpId, PathError> {
    let Verdict::Accept = report.verdict else {
        let Verdict::Reject { reason } = report.verdict else { unreachable!() };
        return Err(PathError::NotAccepted(reason));
    };
    let (Some(route), Some(spectrum), Some(trx)) = (&report.route, report.spectrum, &report.trx) else {
        return Err(PathError::InvalidRequest("accepted report lacks route, spectrum or trx".into()));
    };
    let blocking = store.conflicts(route, &spectrum, None)?;
    if !blocking.is_empty() {
        return Err(StoreError::SpectrumConflict { blocking }.into());
    }
    if report.revision != store.revision() {
        return Err(PathError::StaleReport {
            report_revision: report.revision,
            store_revision: store.revision(),
        });
    }
    let id = report.proposed_id.clone();
    store.register_lightpath(Lightpath {
        id: id.clone(),
        src: report.request.src.clone(),
        dst: report.request.dst.clone(),
        route: route.clone(),
        spectrum,
        trx: trx.clone(),
        target_margin_db: report.request.target_margin_db,
        service_class: report.request.service_class.clone(),
        state: LpState::Active,
        backups: Vec::new(),
    })?;
    let eval = store.evaluate()?;
    let record = store.computed_record(id.as_str(), &eval, timestamp)?;
    store.append_record(id.as_str(), record)?;
    Ok(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_ring_accepts_400g_between_neighbours() {
        let store = fixtures::ring_store();
        let report = whatif_provision(&store, &ProvisionRequest::new("T1", "T2", 400.0, 1.0), WhatifOptions::default())
            .unwrap();
        assert!(report.is_accepted(), "{report:#?}");
        assert!(report.impacts.is_empty());
        assert_eq!(report.route.as_deref(), Some(&[LinkId::from("R1-R2")][..]));
        assert_eq!(report.proposed_id, "LP1");
        let trx = report.trx.as_deref().unwrap();
        assert!(store.catalog().get(trx).unwrap().bitrate_gbps >= 400.0);
    }

    #[test]
    fn whatif_is_pure() {
        let mut store = fixtures::ring_store();
        let first = whatif_provision(&store, &ProvisionRequest::new("T1", "T3", 100.0, 1.0), WhatifOptions::default())
            .unwrap();
        commit_provision(&mut store, &first, 0.0).unwrap();
        let snapshot = store.clone();
        let req = ProvisionRequest::new("T2", "T4", 100.0, 1.0);
        let a = whatif_provision(&store, &req, WhatifOptions::default()).unwrap();
        let b = whatif_provision(&store, &req, WhatifOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(store, snapshot);
    }

    #[test]
    fn neighbour_at_exact_target_is_violated() {
        let mut store = fixtures::ring_store();
        let req = ProvisionRequest::new("T1", "T2", 100.0, 0.0);
        let report = whatif_provision(&store, &req, WhatifOptions::default()).unwrap();
        let id = commit_provision(&mut store, &report, 0.0).unwrap();
        // Pin the existing lightpath's target at its current margin.
        let current = store.history(id.as_str()).unwrap()[0].margin_db.unwrap();
        let mut lp = store.release_lightpath(id.as_str()).unwrap();
        lp.id = "LP9".into();
        lp.target_margin_db = current;
        store.register_lightpath(lp).unwrap();
        let before = store.effective_gsnr("LP9").unwrap().gsnr_db;

        let report = whatif_provision(&store, &req, WhatifOptions { k_routes: 1 }).unwrap();
        assert_eq!(report.verdict, Verdict::Reject { reason: RejectReason::MarginViolation });
        assert_eq!(report.violated, vec![LpId::from("LP9")]);
        let impact = &report.impacts[0];
        assert_eq!(impact.gsnr_before_db.to_bits(), before.to_bits());
        assert!(impact.gsnr_after_db < impact.gsnr_before_db);
        assert!(matches!(report.ensure_accepted(), Err(PathError::MarginViolation { .. })));
    }

    #[test]
    fn commit_checks() {
        let mut store = fixtures::ring_store();
        let req = ProvisionRequest::new("T1", "T4", 100.0, 1.0);
        let report = whatif_provision(&store, &req, WhatifOptions::default()).unwrap();
        let id = commit_provision(&mut store, &report, 100.0).unwrap();
        let lp = store.lightpath(id.as_str()).unwrap();
        assert_eq!(lp.state, LpState::Active);
        let history = store.history(id.as_str()).unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(history[0].source, crate::store::QotSource::Computed);
        let gsnr = store.effective_gsnr(id.as_str()).unwrap().gsnr_db;
        let promised = report.new_lp.as_ref().unwrap().gsnr_db;
        assert!(((gsnr - promised) / promised).abs() < 1e-12);

        // Same report again: its slot is now taken.
        let err = commit_provision(&mut store, &report, 101.0).unwrap_err();
        assert_eq!(err.code(), "SpectrumConflict");

        let other = whatif_provision(&store, &ProvisionRequest::new("T2", "T5", 100.0, 1.0), WhatifOptions::default())
            .unwrap();
        let unrelated = whatif_provision(&store, &ProvisionRequest::new("T6", "T5", 100.0, 1.0), WhatifOptions::default())
            .unwrap();
        commit_provision(&mut store, &unrelated, 102.0).unwrap();
        let err = commit_provision(&mut store, &other, 103.0).unwrap_err();
        assert!(matches!(err, PathError::StaleReport { .. } | PathError::Store(StoreError::SpectrumConflict { .. })));
    }

    #[test]
    fn stale_report_after_intervening_mutation() {
        let mut store = fixtures::ring_store();
        let report = whatif_provision(&store, &ProvisionRequest::new("T1", "T2", 100.0, 1.0), WhatifOptions::default())
            .unwrap();
        let other = whatif_provision(&store, &ProvisionRequest::new("T4", "T5", 100.0, 1.0), WhatifOptions::default())
            .unwrap();
        commit_provision(&mut store, &other, 0.0).unwrap();
        let err = commit_provision(&mut store, &report, 1.0).unwrap_err();
        assert!(matches!(err, PathError::StaleReport { report_revision: 0, store_revision: 1 }));
    }

    #[test]
    fn infeasible_requests() {
        let store = fixtures::ring_store();
        let huge = whatif_provision(&store, &ProvisionRequest::new("T1", "T2", 1600.0, 1.0), WhatifOptions::default())
            .unwrap();
        assert_eq!(huge.verdict, Verdict::Reject { reason: RejectReason::NoFeasibleTrx });
        let greedy = whatif_provision(&store, &ProvisionRequest::new("T1", "T4", 100.0, 40.0), WhatifOptions::default())
            .unwrap();
        assert_eq!(greedy.verdict, Verdict::Reject { reason: RejectReason::NoFeasibleTrx });
        assert!(!greedy.candidates.is_empty());
        assert!(matches!(
            whatif_provision(&store, &ProvisionRequest::new("T1", "T1", 100.0, 1.0), WhatifOptions::default()),
            Err(PathError::InvalidRequest(_))
        ));
        let filtered = ProvisionRequest {
            allow_trx: Some(vec!["100G-QPSK-32GBd-SCFEC".into()]),
            ..ProvisionRequest::new("T1", "T2", 100.0, 1.0)
        };
        let r = whatif_provision(&store, &filtered, WhatifOptions::default()).unwrap();
        assert_eq!(r.trx.as_deref(), Some("100G-QPSK-32GBd-SCFEC"));
    }
}
