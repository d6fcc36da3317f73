use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{ingest, Emulator, EmulatorConfig, TelemetryError, DAY_S};
use crate::doc::SchemaViolation;
use crate::gn::Element;
use crate::path::{commit_provision, whatif_provision, ProvisionRequest, WhatifOptions};
use crate::store::{EvalOptions, LinkId, LpId, Node, StoreError, TwinStore};
use crate::trx::{margin, q_factor};

/// Margin drop at or above which a scenario lightpath counts as degraded.
pub const DEGRADED_DROP_DB: f64 = 0.5;
/// Margin drop below which a scenario lightpath counts as healthy.
pub const HEALTHY_DROP_DB: f64 = 0.15;
/// Samples per lightpath in each scenario telemetry burst.
pub const SCENARIO_BURST: usize = 3;
const SCENARIO_INTERVAL_S: f64 = 900.0;

/// Per-lightpath margins over one burst, in first-seen order.
type BurstMargins = Vec<(LpId, Vec<Option<f64>>)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SpanLossStep {
    pub added_loss_db: f64,
    pub gsnr_db: f64,
    pub ber: f64,
    pub q_db: f64,
    pub margin_db: f64,
    pub rx_power_dbm: f64,
}

/// Copy of `store` with `added_db` of lumped loss in every fiber span of
/// `links`.
pub fn with_added_span_loss(store: &TwinStore, links: &[LinkId], added_db: f64) -> Result<TwinStore, StoreError> {
    for l in links {
        store
            .topology()
            .link(l.as_str())
            .ok_or_else(|| StoreError::UnknownLink(l.clone()))?;
    }
    let wanted: HashSet<&LinkId> = links.iter().collect();
    store.map_topology(|topo| {
        for link in topo.links.iter_mut().filter(|l| wanted.contains(&l.id)) {
            for el in &mut link.elements {
                if let Element::Fiber(span) = el {
                    span.extra_loss_db += added_db;
                }
            }
        }
    })
}

/// Q trajectory of `lp_id` as equal loss is inserted into every span of its
/// route. Amplifier gains follow up to their limit and hold there. The store
/// is not modified.
pub fn simulate_span_loss(
    store: &TwinStore,
    lp_id: &str,
    added_loss_per_span_db: &[f64],
) -> Result<Vec<SpanLossStep>, TelemetryError> {
    let lp = store.lightpath(lp_id)?;
    let trx = store.trx_of(lp)?;
    let route = lp.route.clone();
    let mut out = Vec::with_capacity(added_loss_per_span_db.len());
    for (i, &added) in added_loss_per_span_db.iter().enumerate() {
        if !(added.is_finite() && added >= 0.0) {
            return Err(SchemaViolation::new(
                format!("/added_loss_db/{i}"),
                format!("added loss must be finite and non-negative, got {added}"),
            )
            .into());
        }
        let trial = with_added_span_loss(store, &route, added)?;
        let path = trial.effective_gsnr_with(lp_id, EvalOptions::clamped())?;
        let ber = trx.curve_ber(path.gsnr_db);
        out.push(SpanLossStep {
            added_loss_db: added,
            gsnr_db: path.gsnr_db,
            ber,
            q_db: q_factor(ber)?,
            margin_db: margin(trx, path.gsnr_db)?,
            rx_power_dbm: path.rx_power_dbm,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultScenarioConfig {
    pub seed: u64,
    /// Lightpaths to provision when the base store has none.
    pub lightpaths: usize,
    /// Injected link; drawn among loaded links when absent.
    pub fault_link: Option<LinkId>,
    pub added_loss_db: f64,
    pub noise_sigma_db: f64,
}

impl Default for FaultScenarioConfig {
    fn default() -> Self {
        FaultScenarioConfig {
            seed: 0,
            lightpaths: 20,
            fault_link: None,
            added_loss_db: 6.0,
            noise_sigma_db: 0.02,
        }
    }
}

/// A store with one lossy link, telemetry from before and after the fault
/// already ingested, and the ground truth.
#[derive(Debug, Clone)]
pub struct FaultScenario {
    pub store: TwinStore,
    pub fault_link: LinkId,
    /// Measured margin drop per lightpath; absent when either sample was
    /// flagged.
    pub drops: Vec<(LpId, Option<f64>)>,
    pub degraded: Vec<LpId>,
    pub healthy: Vec<LpId>,
}

fn populate(store: &mut TwinStore, rng: &mut ChaCha8Rng, count: usize) -> Result<(), TelemetryError> {
    let sites: Vec<String> = store
        .topology()
        .nodes
        .iter()
        .filter_map(|n| match n {
            Node::TrxSite(s) => Some(s.id.to_string()),
            Node::Roadm(_) => None,
        })
        .collect();
    if sites.len() < 2 {
        return Err(SchemaViolation::new("/nodes", "scenario needs at least two transceiver sites").into());
    }
    let mut attempts = 0;
    while store.lightpaths().count() < count && attempts < 20 * count {
        attempts += 1;
        let pair: Vec<&String> = sites.choose_multiple(rng, 2).collect();
        let bitrate = if rng.random_bool(0.5) { 100.0 } else { 400.0 };
        let mut req = ProvisionRequest::new(pair[0], pair[1], bitrate, 1.0);
        req.service_class = "scenario".into();
        let report = match whatif_provision(store, &req, WhatifOptions::default()) {
            Ok(r) => r,
            Err(crate::path::PathError::InvalidRequest(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if report.is_accepted() {
            commit_provision(store, &report, 0.0)?;
        }
    }
    Ok(())
}

/// Seeded fault-localization scenario: provisions random lightpaths if the
/// base store is empty, takes a burst of emulated telemetry, injects loss
/// into one link's spans and takes another burst a day later.
///
/// Drops compare burst means. Lightpaths whose margin fell by [`DEGRADED_DROP_DB`] or more are
/// degraded; those that moved less than [`HEALTHY_DROP_DB`] are healthy; the
/// rest are left out of both sets.
pub fn generate_fault_scenario(base: &TwinStore, config: &FaultScenarioConfig) -> Result<FaultScenario, TelemetryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut store = base.clone();
    if store.lightpaths().next().is_none() {
        populate(&mut store, &mut rng, config.lightpaths)?;
    }
    let fault_link = match &config.fault_link {
        Some(l) => {
            store
                .topology()
                .link(l.as_str())
                .ok_or_else(|| StoreError::UnknownLink(l.clone()))?;
            l.clone()
        }
        None => {
            let loaded: Vec<LinkId> = store
                .topology()
                .links
                .iter()
                .filter(|l| store.lightpaths().any(|lp| lp.route.contains(&l.id)))
                .map(|l| l.id.clone())
                .collect();
            loaded
                .choose(&mut rng)
                .cloned()
                .ok_or_else(|| SchemaViolation::new("/lightpaths", "no loaded link to fault"))?
        }
    };
    let mut emulator = Emulator::new(EmulatorConfig {
        seed: rng.random(),
        sigma_db: config.noise_sigma_db,
        ..EmulatorConfig::default()
    });
    let t_before = store
        .lightpaths()
        .filter_map(|lp| store.history(lp.id.as_str()).ok()?.last().map(|r| r.timestamp))
        .fold(0.0, f64::max)
        + 1.0;
    // Bursts a day apart, so the pre-fault burst forms the detector baseline.
    let burst = |store: &mut TwinStore, em: &mut Emulator, t0: f64| -> Result<BurstMargins, TelemetryError> {
        let mut margins: BurstMargins = Vec::new();
        for k in 0..SCENARIO_BURST {
            for s in em.sample(store, t0 + k as f64 * SCENARIO_INTERVAL_S)? {
                let m = ingest(store, &s)?.margin_db;
                match margins.iter_mut().find(|(id, _)| *id == s.lp_id) {
                    Some((_, v)) => v.push(m),
                    None => margins.push((s.lp_id.clone(), vec![m])),
                }
            }
        }
        Ok(margins)
    };
    let mean = |v: &[Option<f64>]| -> Option<f64> {
        let all: Option<Vec<f64>> = v.iter().copied().collect();
        all.map(|a| a.iter().sum::<f64>() / a.len() as f64)
    };
    let before = burst(&mut store, &mut emulator, t_before)?;
    let mut faulty = with_added_span_loss(&store, std::slice::from_ref(&fault_link), config.added_loss_db)?;
    let after = burst(&mut faulty, &mut emulator, t_before + DAY_S)?;
    let drops: Vec<(LpId, Option<f64>)> = after
        .iter()
        .map(|(id, a)| {
            let b = before.iter().find(|(bid, _)| bid == id).and_then(|(_, b)| mean(b));
            (id.clone(), b.zip(mean(a)).map(|(b, a)| b - a))
        })
        .collect();
    let degraded = drops
        .iter()
        .filter(|(_, d)| d.is_some_and(|d| d >= DEGRADED_DROP_DB))
        .map(|(id, _)| id.clone())
        .collect();
    let healthy = drops
        .iter()
        .filter(|(_, d)| d.is_some_and(|d| d < HEALTHY_DROP_DB))
        .map(|(id, _)| id.clone())
        .collect();
    Ok(FaultScenario {
        store: faulty,
        fault_link,
        drops,
        degraded,
        healthy,
    })
}
