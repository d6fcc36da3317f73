//! Digital-domain state: topology, spectrum occupancy, the lightpath
//! registry with per-lightpath QoT history, and snapshot documents.

mod eval;
mod ids;
mod lightpath;
mod persist;
mod topology;

pub use eval::{evaluate_lightpaths, EvalOptions, HopQot, NetworkQot, PathQot};
pub use ids::{LinkId, LpId, NodeId};
pub use lightpath::{
    ArchivedLightpath, BackupRoute, Lightpath, LpState, MarginPolicy, QotRecord, QotSource, Spectrum,
};
pub use persist::{DataDir, HistoryLine, LightpathsDoc, PendingWrite, LIGHTPATHS_VERSION};
pub use topology::{Band, Link, LinkMode, Node, Topology, TrxSite, TOPOLOGY_VERSION};

use std::collections::HashSet;

use thiserror::Error;

use crate::doc::SchemaViolation;
use crate::gn::EngineError;
use crate::trx::{q_factor, QotPoint, TrxCatalog, TrxError, TrxType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error(transparent)]
    Schema(#[from] SchemaViolation),
    #[error("spectrum occupied by {}", list(.blocking))]
    SpectrumConflict { blocking: Vec<LpId> },
    #[error("unknown lightpath {0}")]
    UnknownLightpath(LpId),
    #[error("lightpath {0} already exists")]
    DuplicateLightpath(LpId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("timestamp {timestamp} not after the last sample at {last} for {lp}")]
    NonMonotonicTimestamp { lp: LpId, timestamp: f64, last: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Trx(#[from] TrxError),
    #[error("i/o error: {0}")]
    Io(String),
}

fn list(ids: &[LpId]) -> String {
    ids.iter().map(LpId::as_str).collect::<Vec<_>>().join(", ")
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Schema(_) => "SchemaViolation",
            StoreError::SpectrumConflict { .. } => "SpectrumConflict",
            StoreError::UnknownLightpath(_) => "UnknownLightpath",
            StoreError::DuplicateLightpath(_) => "DuplicateLightpath",
            StoreError::UnknownNode(_) => "UnknownNode",
            StoreError::UnknownLink(_) => "UnknownLink",
            StoreError::InvalidRoute(_) => "InvalidRoute",
            StoreError::InvalidSpectrum(_) => "InvalidSpectrum",
            StoreError::NonMonotonicTimestamp { .. } => "NonMonotonicTimestamp",
            StoreError::Engine(e) => e.code(),
            StoreError::Trx(e) => e.code(),
            StoreError::Io(_) => "Io",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    lp: Lightpath,
    history: Vec<QotRecord>,
}

#[derive(Debug, Clone, PartialEq)]
struct Archived {
    entry: Entry,
    released_at_revision: u64,
}

/// The twin's state. Mutations go through `&mut self`; callers that share
/// a store serialize them behind one writer.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinStore {
    topology: Topology,
    catalog: TrxCatalog,
    policy: MarginPolicy,
    entries: Vec<Entry>,
    archived: Vec<Archived>,
    revision: u64,
    next_sequence: u64,
}

/// Node sequence a route visits, starting at the source ROADM.
fn walk_route(topology: &Topology, lp: &Lightpath) -> Result<Vec<NodeId>, StoreError> {
    let (src, _) = topology
        .attachment(lp.src.as_str())
        .ok_or_else(|| StoreError::UnknownNode(lp.src.clone()))?;
    let (dst, _) = topology
        .attachment(lp.dst.as_str())
        .ok_or_else(|| StoreError::UnknownNode(lp.dst.clone()))?;
    if lp.route.is_empty() {
        return Err(StoreError::InvalidRoute(format!("{} has an empty route", lp.id)));
    }
    let mut nodes = vec![NodeId::from(src.id.as_str())];
    for link_id in &lp.route {
        let link = topology
            .link(link_id.as_str())
            .ok_or_else(|| StoreError::UnknownLink(link_id.clone()))?;
        let here = nodes.last().expect("non-empty");
        let next = link.other_end(here.as_str()).ok_or_else(|| {
            StoreError::InvalidRoute(format!("link {link_id} does not touch {here}"))
        })?;
        if nodes.contains(next) {
            return Err(StoreError::InvalidRoute(format!(
                "route of {} revisits {next}",
                lp.id
            )));
        }
        nodes.push(next.clone());
    }
    if nodes.last().expect("non-empty").as_str() != dst.id {
        return Err(StoreError::InvalidRoute(format!(
            "route of {} ends at {}, not {}",
            lp.id,
            nodes.last().expect("non-empty"),
            dst.id
        )));
    }
    Ok(nodes)
}

fn overlaps(a: (u32, u32), b: (u32, u32)) -> bool {
    a.0 < b.0 + b.1 && b.0 < a.0 + a.1
}

impl TwinStore {
    pub fn new(topology: Topology, catalog: TrxCatalog) -> Result<Self, StoreError> {
        topology.validate()?;
        Ok(TwinStore {
            topology,
            catalog,
            policy: MarginPolicy::default(),
            entries: Vec::new(),
            archived: Vec::new(),
            revision: 0,
            next_sequence: 1,
        })
    }

    pub fn with_policy(mut self, policy: MarginPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn catalog(&self) -> &TrxCatalog {
        &self.catalog
    }

    pub fn policy(&self) -> &MarginPolicy {
        &self.policy
    }

    /// Monotone counter bumped by every registry mutation.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Identifier the next provisioned lightpath will receive.
    pub fn next_lightpath_id(&self) -> LpId {
        LpId(format!("LP{}", self.next_sequence))
    }

    pub fn lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.entries.iter().map(|e| &e.lp)
    }

    pub fn archived(&self) -> impl Iterator<Item = (&Lightpath, u64)> {
        self.archived
            .iter()
            .map(|a| (&a.entry.lp, a.released_at_revision))
    }

    fn entry(&self, id: &str) -> Result<&Entry, StoreError> {
        self.entries
            .iter()
            .find(|e| e.lp.id == id)
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))
    }

    fn entry_mut(&mut self, id: &str) -> Result<&mut Entry, StoreError> {
        self.entries
            .iter_mut()
            .find(|e| e.lp.id == id)
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))
    }

    pub fn lightpath(&self, id: &str) -> Result<&Lightpath, StoreError> {
        Ok(&self.entry(id)?.lp)
    }

    /// History of a live or archived lightpath.
    pub fn history(&self, id: &str) -> Result<&[QotRecord], StoreError> {
        if let Ok(e) = self.entry(id) {
            return Ok(&e.history);
        }
        self.archived
            .iter()
            .find(|a| a.entry.lp.id == id)
            .map(|a| a.entry.history.as_slice())
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))
    }

    pub fn trx_of(&self, lp: &Lightpath) -> Result<&TrxType, StoreError> {
        Ok(self.catalog.get(&lp.trx)?)
    }

    /// Node sequence of a lightpath's route, validating it.
    pub fn route_nodes(&self, lp: &Lightpath) -> Result<Vec<NodeId>, StoreError> {
        walk_route(&self.topology, lp)
    }

    /// Registered lightpaths whose spectrum overlaps `spectrum` on any of
    /// `route`, skipping `except`.
    pub fn conflicts(
        &self,
        route: &[LinkId],
        spectrum: &Spectrum,
        except: Option<&str>,
    ) -> Result<Vec<LpId>, StoreError> {
        let band = &self.topology.band;
        let want = band.slot_range(spectrum).map_err(StoreError::InvalidSpectrum)?;
        let links: HashSet<&LinkId> = route.iter().collect();
        let mut out = Vec::new();
        for e in &self.entries {
            if Some(e.lp.id.as_str()) == except || !e.lp.route.iter().any(|l| links.contains(l)) {
                continue;
            }
            let have = band
                .slot_range(&e.lp.spectrum)
                .expect("registered spectra are aligned");
            if overlaps(want, have) {
                out.push(e.lp.id.clone());
            }
        }
        Ok(out)
    }

    /// Slot ranges held on `link`, ordered by first slot.
    pub fn occupancy(&self, link: &str) -> Vec<(u32, u32, LpId)> {
        let band = &self.topology.band;
        let mut out: Vec<(u32, u32, LpId)> = self
            .entries
            .iter()
            .filter(|e| e.lp.route.iter().any(|l| l == link))
            .map(|e| {
                let (first, n) = band.slot_range(&e.lp.spectrum).expect("aligned");
                (first, n, e.lp.id.clone())
            })
            .collect();
        out.sort();
        out
    }

    fn check_lightpath(&self, lp: &Lightpath, except: Option<&str>) -> Result<(), StoreError> {
        walk_route(&self.topology, lp)?;
        self.catalog.get(&lp.trx)?;
        let blocking = self.conflicts(&lp.route, &lp.spectrum, except)?;
        if !blocking.is_empty() {
            return Err(StoreError::SpectrumConflict { blocking });
        }
        Ok(())
    }

    fn bump_sequence(&mut self, id: &LpId) {
        if let Some(n) = id.as_str().strip_prefix("LP").and_then(|n| n.parse::<u64>().ok()) {
            self.next_sequence = self.next_sequence.max(n + 1);
        }
    }

    /// Adds a lightpath after checking its route and spectrum.
    pub fn register_lightpath(&mut self, lp: Lightpath) -> Result<(), StoreError> {
        if self.entry(lp.id.as_str()).is_ok() || self.archived.iter().any(|a| a.entry.lp.id == lp.id) {
            return Err(StoreError::DuplicateLightpath(lp.id));
        }
        self.check_lightpath(&lp, None)?;
        self.bump_sequence(&lp.id);
        self.entries.push(Entry {
            lp,
            history: Vec::new(),
        });
        self.revision += 1;
        Ok(())
    }

    /// Frees the lightpath's spectrum and moves it, with its history, to the
    /// archive.
    pub fn release_lightpath(&mut self, id: &str) -> Result<Lightpath, StoreError> {
        let pos = self
            .entries
            .iter()
            .position(|e| e.lp.id == id)
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))?;
        let entry = self.entries.remove(pos);
        self.revision += 1;
        let lp = entry.lp.clone();
        self.archived.push(Archived {
            entry,
            released_at_revision: self.revision,
        });
        Ok(lp)
    }

    /// Moves a lightpath onto another route and slot, keeping its history.
    pub fn reroute(&mut self, id: &str, route: Vec<LinkId>, spectrum: Spectrum) -> Result<(), StoreError> {
        let mut lp = self.lightpath(id)?.clone();
        lp.route = route;
        lp.spectrum = spectrum;
        self.check_lightpath(&lp, Some(id))?;
        self.entry_mut(id)?.lp = lp;
        self.revision += 1;
        Ok(())
    }

    pub fn set_state(&mut self, id: &str, state: LpState) -> Result<(), StoreError> {
        let entry = self.entry_mut(id)?;
        if entry.lp.state != state {
            entry.lp.state = state;
            self.revision += 1;
        }
        Ok(())
    }

    pub fn set_backups(&mut self, id: &str, backups: Vec<BackupRoute>) -> Result<(), StoreError> {
        self.entry_mut(id)?.lp.backups = backups;
        self.revision += 1;
        Ok(())
    }

    /// Appends to a lightpath's history. Past records are never touched.
    pub fn append_record(&mut self, id: &str, record: QotRecord) -> Result<(), StoreError> {
        let entry = self.entry_mut(id)?;
        if let Some(last) = entry.history.last() {
            if !(record.timestamp > last.timestamp) {
                return Err(StoreError::NonMonotonicTimestamp {
                    lp: entry.lp.id.clone(),
                    timestamp: record.timestamp,
                    last: last.timestamp,
                });
            }
        }
        entry.history.push(record);
        Ok(())
    }

    /// Mutable topology access for what-if copies; validates on the way out.
    pub fn map_topology<F>(&self, f: F) -> Result<TwinStore, StoreError>
    where
        F: FnOnce(&mut Topology),
    {
        let mut copy = self.clone();
        f(&mut copy.topology);
        copy.topology.validate()?;
        Ok(copy)
    }

    /// QoT of every lit lightpath.
    pub fn evaluate(&self) -> Result<NetworkQot, StoreError> {
        self.evaluate_with(EvalOptions::default())
    }

    pub fn evaluate_with(&self, options: EvalOptions) -> Result<NetworkQot, StoreError> {
        let lit: Vec<&Lightpath> = self.lightpaths().filter(|lp| lp.state.is_lit()).collect();
        evaluate_lightpaths(&self.topology, &self.catalog, &lit, options)
    }

    /// End-to-end GSNR breakdown of one lightpath under the current load.
    pub fn effective_gsnr(&self, id: &str) -> Result<PathQot, StoreError> {
        self.effective_gsnr_with(id, EvalOptions::default())
    }

    /// As [`TwinStore::effective_gsnr`]; a dark lightpath is evaluated as if
    /// lit on top of the current load.
    pub fn effective_gsnr_with(&self, id: &str, options: EvalOptions) -> Result<PathQot, StoreError> {
        let lp = self.lightpath(id)?;
        let eval = if lp.state.is_lit() {
            self.evaluate_with(options)?
        } else {
            let mut lit: Vec<&Lightpath> = self.lightpaths().filter(|l| l.state.is_lit()).collect();
            lit.push(lp);
            evaluate_lightpaths(&self.topology, &self.catalog, &lit, options)?
        };
        Ok(eval.get(id).expect("evaluated").clone())
    }

    /// Transceiver operating point of a lightpath at its computed GSNR.
    pub fn qot_point(&self, id: &str, eval: &NetworkQot) -> Result<QotPoint, StoreError> {
        let lp = self.lightpath(id)?;
        let path = eval
            .get(id)
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))?;
        Ok(QotPoint::evaluate(self.trx_of(lp)?, path.gsnr_db, Some(path.rx_power_dbm))?)
    }

    /// History record for the model's own prediction.
    pub fn computed_record(&self, id: &str, eval: &NetworkQot, timestamp: f64) -> Result<QotRecord, StoreError> {
        let lp = self.lightpath(id)?;
        let trx = self.trx_of(lp)?;
        let path = eval
            .get(id)
            .ok_or_else(|| StoreError::UnknownLightpath(LpId::from(id)))?;
        let ber = trx.curve_ber(path.gsnr_db);
        Ok(QotRecord {
            timestamp,
            ber,
            gsnr_est_db: Some(path.gsnr_db),
            margin_db: Some(crate::trx::margin(trx, path.gsnr_db)?),
            q_db: q_factor(ber)?,
            rx_power_dbm: Some(path.rx_power_dbm),
            source: QotSource::Computed,
            flag: None,
        })
    }
}
