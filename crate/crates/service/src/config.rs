//! Service configuration: a TOML file, then `ONDT_PORT` / `ONDT_DATA_DIR`,
//! then command-line flags, each overriding the previous.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ondt_core::store::{DataDir, MarginPolicy, StoreError, TwinStore};
use ondt_core::trx::TrxCatalog;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analytics {
    /// Candidate routes tried per what-if request.
    pub k_routes: usize,
    /// Samples per sliding window of the degradation detector.
    pub detect_window: usize,
    pub detect_delta_db: f64,
}

impl Default for Analytics {
    fn default() -> Self {
        Analytics {
            k_routes: 3,
            detect_window: 3,
            detect_delta_db: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub degraded_threshold_db: f64,
    pub per_service_class: BTreeMap<String, f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        let p = MarginPolicy::default();
        Thresholds {
            degraded_threshold_db: p.degraded_threshold_db,
            per_service_class: p.per_service_class,
        }
    }
}

impl Thresholds {
    pub fn policy(&self) -> MarginPolicy {
        MarginPolicy {
            degraded_threshold_db: self.degraded_threshold_db,
            per_service_class: self.per_service_class.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bind: String,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Transceiver catalog; falls back to `<data_dir>/catalog.json`, then to
    /// the built-in generations.
    pub catalog: Option<PathBuf>,
    pub thresholds: Thresholds,
    pub analytics: Analytics,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("ondt-data"),
            catalog: None,
            thresholds: Thresholds::default(),
            analytics: Analytics::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ApiError> {
        toml::from_str(text).map_err(|e| ApiError::new("InvalidConfig", e.message().to_string()))
    }

    /// Reads `path` when given, otherwise starts from defaults; then applies
    /// the environment.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ApiError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ApiError::new("InvalidConfig", format!("{}: {e}", p.display())))?;
                Config::from_toml(&text)?
            }
            None => Config::default(),
        };
        if let Some(port) = env("ONDT_PORT") {
            config.port = port
                .parse()
                .map_err(|_| ApiError::new("InvalidConfig", format!("ONDT_PORT={port} is not a port number")))?;
        }
        if let Some(dir) = env("ONDT_DATA_DIR") {
            config.data_dir = PathBuf::from(dir);
        }
        Ok(config)
    }

    pub fn data(&self) -> DataDir {
        DataDir::new(&self.data_dir)
    }

    fn catalog_override(&self) -> Result<Option<TrxCatalog>, StoreError> {
        match &self.catalog {
            None => Ok(None),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| StoreError::Io(format!("{}: {e}", p.display())))?;
                Ok(Some(TrxCatalog::from_json(&text)?))
            }
        }
    }

    /// Loads the store from the data directory with this config's catalog
    /// and thresholds.
    pub fn open_store(&self) -> Result<TwinStore, ApiError> {
        let data = self.data();
        if !data.exists() {
            return Err(ApiError::new(
                "NoDataDir",
                format!("{} holds no twin; run `ondt init` first", data.root().display()),
            ));
        }
        let mut store = match self.catalog_override()? {
            None => data.load()?,
            Some(catalog) => {
                let read = |p: PathBuf| std::fs::read_to_string(&p).ok();
                let topology = std::fs::read_to_string(data.topology_path())
                    .map_err(|e| StoreError::Io(format!("{}: {e}", data.topology_path().display())))?;
                TwinStore::from_documents(
                    &topology,
                    read(data.lightpaths_path()).as_deref(),
                    read(data.history_path()).as_deref(),
                    catalog,
                )?
            }
        };
        store.set_policy(self.thresholds.policy());
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn environment_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ondt.toml");
        std::fs::write(
            &path,
            "port = 9000\ndata_dir = \"/srv/twin\"\n[thresholds]\ndegraded_threshold_db = 2.0\n[thresholds.per_service_class]\ngold = 3.0\n",
        )
        .unwrap();
        let c = Config::load(Some(&path), |_| None).unwrap();
        assert_eq!((c.port, c.data_dir.to_str().unwrap()), (9000, "/srv/twin"));
        assert_eq!(c.thresholds.policy().threshold_db("gold"), 3.0);
        assert_eq!(c.thresholds.policy().threshold_db("standard"), 2.0);

        let env = |k: &str| match k {
            "ONDT_PORT" => Some("9100".to_string()),
            "ONDT_DATA_DIR" => Some("/tmp/other".to_string()),
            _ => None,
        };
        let c = Config::load(Some(&path), env).unwrap();
        assert_eq!((c.port, c.data_dir.to_str().unwrap()), (9100, "/tmp/other"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ports() {
        assert_eq!(Config::from_toml("prot = 1").unwrap_err().code, "InvalidConfig");
        let err = Config::load(None, |_| Some("http".into())).unwrap_err();
        assert!(err.message.contains("ONDT_PORT"));
    }
}
