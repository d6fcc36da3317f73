use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{assign_spectrum, k_shortest_routes_avoiding, PathError};
use crate::store::{BackupRoute, Lightpath, LinkId, LpState, StoreError, TwinStore};
use crate::trx::{QotPoint, TrxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackupOptions {
    /// Backups kept per lightpath.
    pub k: usize,
    /// Disjoint routes examined before ranking by margin.
    pub pool: usize,
}

impl Default for BackupOptions {
    fn default() -> Self {
        BackupOptions { k: 2, pool: 64 }
    }
}

/// Link-disjoint alternates for `lp_id`, each with first-fit spectrum and a
/// margin at or above the lightpath's target when carrying it under the
/// current load. Best margin first. Stores them on the lightpath.
pub fn precompute_backups(
    store: &mut TwinStore,
    lp_id: &str,
    options: BackupOptions,
) -> Result<Vec<BackupRoute>, PathError> {
    let backups = rank_backups(store, lp_id, options)?;
    store.set_backups(lp_id, backups.clone())?;
    Ok(backups)
}

fn rank_backups(store: &TwinStore, lp_id: &str, options: BackupOptions) -> Result<Vec<BackupRoute>, PathError> {
    let lp = store.lightpath(lp_id)?.clone();
    if options.k == 0 {
        return Ok(Vec::new());
    }
    let trx = store.trx_of(&lp)?.clone();
    let slots = store.topology().band.slots_for_baud(trx.baud_gbd);
    let avoid: HashSet<LinkId> = lp.route.iter().cloned().collect();
    let pool = match k_shortest_routes_avoiding(
        store.topology(),
        lp.src.as_str(),
        lp.dst.as_str(),
        options.pool.max(1),
        &avoid,
    ) {
        Ok(set) => set.routes,
        Err(PathError::NoRoute { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for route in pool {
        let spectrum = match assign_spectrum(store, &route.links, slots) {
            Ok(s) => s,
            Err(PathError::NoSpectrum { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut trial = store.clone();
        trial.reroute(lp_id, route.links.clone(), spectrum)?;
        // Evaluate as carrying traffic even when the primary is down.
        if !lp.state.is_lit() {
            trial.set_state(lp_id, LpState::Active)?;
        }
        let path = match trial.effective_gsnr(lp_id) {
            Ok(p) => p,
            Err(StoreError::Engine(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let point = match QotPoint::evaluate(&trx, path.gsnr_db, Some(path.rx_power_dbm)) {
            Ok(p) => p,
            Err(TrxError::RxPowerOutOfRange { .. }) => continue,
            Err(e) => return Err(StoreError::from(e).into()),
        };
        if point.margin_db >= lp.target_margin_db {
            out.push(BackupRoute {
                route: route.links,
                spectrum,
                gsnr_db: point.gsnr_db,
                margin_db: point.margin_db,
            });
        }
    }
    // Stable: equal margins keep route rank order.
    out.sort_by(|a, b| b.margin_db.total_cmp(&a.margin_db));
    out.truncate(options.k);
    Ok(out)
}

/// Moves a lightpath onto its `index`-th precomputed backup and marks it
/// active. The remaining backups are cleared, since they were ranked for the
/// old primary.
pub fn activate_backup(store: &mut TwinStore, lp_id: &str, index: usize) -> Result<Lightpath, PathError> {
    let lp = store.lightpath(lp_id)?;
    let backup = lp
        .backups
        .get(index)
        .cloned()
        .ok_or_else(|| PathError::InvalidRequest(format!("{lp_id} has no backup #{index}")))?;
    store.reroute(lp_id, backup.route, backup.spectrum)?;
    store.set_state(lp_id, LpState::Active)?;
    store.set_backups(lp_id, Vec::new())?;
    Ok(store.lightpath(lp_id)?.clone())
}
