use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{
    walk_route, Archived, ArchivedLightpath, Entry, Lightpath, LpId, MarginPolicy, QotRecord, StoreError,
    Topology, TwinStore,
};
use crate::doc::{self, SchemaViolation};
use crate::trx::TrxCatalog;

pub const LIGHTPATHS_VERSION: u32 = 1;

/// `lightpaths.json`: the registry without histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LightpathsDoc {
    pub version: u32,
    pub revision: u64,
    pub next_sequence: u64,
    #[serde(default)]
    pub lightpaths: Vec<Lightpath>,
    #[serde(default)]
    pub archived: Vec<ArchivedLightpath>,
}

/// One line of `history.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct HistoryLine {
    pub lp_id: LpId,
    pub record: QotRecord,
}

impl TwinStore {
    /// Loads a topology document into an empty registry.
    pub fn from_topology_json(text: &str, catalog: TrxCatalog) -> Result<Self, StoreError> {
        let topology: Topology = doc::parse(text)?;
        TwinStore::new(topology, catalog)
    }

    pub fn topology_json(&self) -> String {
        doc::to_pretty(&self.topology)
    }

    pub fn lightpaths_doc(&self) -> LightpathsDoc {
        LightpathsDoc {
            version: LIGHTPATHS_VERSION,
            revision: self.revision,
            next_sequence: self.next_sequence,
            lightpaths: self.entries.iter().map(|e| e.lp.clone()).collect(),
            archived: self
                .archived
                .iter()
                .map(|a| ArchivedLightpath {
                    lightpath: a.entry.lp.clone(),
                    released_at_revision: a.released_at_revision,
                })
                .collect(),
        }
    }

    pub fn lightpaths_json(&self) -> String {
        doc::to_pretty(&self.lightpaths_doc())
    }

    /// Every history record, grouped per lightpath, live ones first.
    pub fn history_lines(&self) -> Vec<HistoryLine> {
        self.entries
            .iter()
            .chain(self.archived.iter().map(|a| &a.entry))
            .flat_map(|e| {
                e.history.iter().map(|r| HistoryLine {
                    lp_id: e.lp.id.clone(),
                    record: r.clone(),
                })
            })
            .collect()
    }

    pub fn history_jsonl(&self) -> String {
        self.history_lines().iter().map(history_line_json).collect()
    }

    /// Rebuilds a store from its three documents.
    ///
    /// Lightpaths are checked in document order; an overlap names both the
    /// offending entry and the lightpath it collides with.
    pub fn from_documents(
        topology_json: &str,
        lightpaths_json: Option<&str>,
        history_jsonl: Option<&str>,
        catalog: TrxCatalog,
    ) -> Result<Self, StoreError> {
        let mut store = TwinStore::from_topology_json(topology_json, catalog)?;
        let Some(text) = lightpaths_json else {
            return Ok(store);
        };
        let lp_doc: LightpathsDoc = doc::parse(text)?;
        if lp_doc.version != LIGHTPATHS_VERSION {
            return Err(SchemaViolation::new("/version", format!("unsupported version {}", lp_doc.version)).into());
        }
        for (i, lp) in lp_doc.lightpaths.into_iter().enumerate() {
            let at = |suffix: &str, msg: String| -> StoreError {
                SchemaViolation::new(format!("/lightpaths/{i}{suffix}"), msg).into()
            };
            if store.entries.iter().any(|e| e.lp.id == lp.id) {
                return Err(at("/id", format!("duplicate lightpath id {}", lp.id)));
            }
            walk_route(&store.topology, &lp).map_err(|e| at("/route", e.to_string()))?;
            store.catalog.get(&lp.trx).map_err(|e| at("/trx", e.to_string()))?;
            let blocking = store
                .conflicts(&lp.route, &lp.spectrum, None)
                .map_err(|e| at("/spectrum", e.to_string()))?;
            if let Some(other) = blocking.first() {
                return Err(at(
                    "/spectrum",
                    format!("spectrum of {} overlaps {} on a shared link", lp.id, other),
                ));
            }
            store.entries.push(Entry { lp, history: Vec::new() });
        }
        for a in lp_doc.archived {
            store.archived.push(Archived {
                entry: Entry {
                    lp: a.lightpath,
                    history: Vec::new(),
                },
                released_at_revision: a.released_at_revision,
            });
        }
        store.revision = lp_doc.revision;
        store.next_sequence = lp_doc.next_sequence;

        if let Some(text) = history_jsonl {
            let mut index: HashMap<LpId, (bool, usize)> = HashMap::new();
            for (k, e) in store.entries.iter().enumerate() {
                index.insert(e.lp.id.clone(), (true, k));
            }
            for (k, a) in store.archived.iter().enumerate() {
                index.insert(a.entry.lp.id.clone(), (false, k));
            }
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let line: HistoryLine = doc::parse(line).map_err(|e| {
                    SchemaViolation::new(format!("/{n}{}", e.path), format!("history line {}: {}", n + 1, e.message))
                })?;
                let &(live, k) = index.get(&line.lp_id).ok_or_else(|| {
                    SchemaViolation::new(format!("/{n}/lp_id"), format!("history for unknown lightpath {}", line.lp_id))
                })?;
                let history = if live {
                    &mut store.entries[k].history
                } else {
                    &mut store.archived[k].entry.history
                };
                if history.last().is_some_and(|r| !(line.record.timestamp > r.timestamp)) {
                    return Err(SchemaViolation::new(
                        format!("/{n}/record/timestamp"),
                        format!("timestamps of {} are not strictly increasing", line.lp_id),
                    )
                    .into());
                }
                history.push(line.record);
            }
        }
        Ok(store)
    }

    pub fn set_policy(&mut self, policy: MarginPolicy) {
        self.policy = policy;
    }
}

fn history_line_json(line: &HistoryLine) -> String {
    let mut s = serde_json::to_string(line).expect("history serializes");
    s.push('\n');
    s
}

fn io_err(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io(format!("{}: {e}", path.display()))
}

/// On-disk layout: `topology.json`, `lightpaths.json`, `history.jsonl` and an
/// optional `catalog.json`.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

/// Documents to write after a mutation, produced while the store is locked
/// and written after the lock is released.
#[derive(Debug, Clone, Default)]
pub struct PendingWrite {
    pub topology: Option<String>,
    pub lightpaths: Option<String>,
    pub history_append: Vec<HistoryLine>,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn topology_path(&self) -> PathBuf {
        self.root.join("topology.json")
    }

    pub fn lightpaths_path(&self) -> PathBuf {
        self.root.join("lightpaths.json")
    }

    pub fn history_path(&self) -> PathBuf {
        self.root.join("history.jsonl")
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.root.join("catalog.json")
    }

    pub fn exists(&self) -> bool {
        self.topology_path().is_file()
    }

    fn read_optional(path: &Path) -> Result<Option<String>, StoreError> {
        match fs::read_to_string(path) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(path, e)),
        }
    }

    pub fn load_catalog(&self) -> Result<TrxCatalog, StoreError> {
        match Self::read_optional(&self.catalog_path())? {
            Some(text) => Ok(TrxCatalog::from_json(&text)?),
            None => Ok(TrxCatalog::default_generations()),
        }
    }

    pub fn load(&self) -> Result<TwinStore, StoreError> {
        let path = self.topology_path();
        let topology = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        TwinStore::from_documents(
            &topology,
            Self::read_optional(&self.lightpaths_path())?.as_deref(),
            Self::read_optional(&self.history_path())?.as_deref(),
            self.load_catalog()?,
        )
    }

    fn write_atomic(path: &Path, contents: &str) -> Result<(), StoreError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| io_err(path, e))
    }

    /// Writes every document from scratch.
    pub fn save(&self, store: &TwinStore) -> Result<(), StoreError> {
        fs::create_dir_all(&self.root).map_err(|e| io_err(&self.root, e))?;
        Self::write_atomic(&self.topology_path(), &store.topology_json())?;
        Self::write_atomic(&self.lightpaths_path(), &store.lightpaths_json())?;
        Self::write_atomic(&self.history_path(), &store.history_jsonl())
    }

    pub fn apply(&self, pending: &PendingWrite) -> Result<(), StoreError> {
        if let Some(t) = &pending.topology {
            Self::write_atomic(&self.topology_path(), t)?;
        }
        if let Some(l) = &pending.lightpaths {
            Self::write_atomic(&self.lightpaths_path(), l)?;
        }
        if !pending.history_append.is_empty() {
            let path = self.history_path();
            let mut f = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| io_err(&path, e))?;
            let text: String = pending.history_append.iter().map(history_line_json).collect();
            f.write_all(text.as_bytes()).map_err(|e| io_err(&path, e))?;
        }
        Ok(())
    }
}
