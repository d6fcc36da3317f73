//! JSON Schemas of every exchanged document, generated from the types.
//!
//! The committed copies under `schemas/` are checked against these by a
//! test; regenerate them with `ONDT_UPDATE_SCHEMAS=1 cargo test --workspace schema`.

use schemars::{schema_for, JsonSchema};
use serde_json::Value;

/// Bumped whenever a published document changes shape.
pub const SCHEMA_VERSION: u32 = 1;

/// `(name, schema)` for one type, tagged with its versioned id.
pub fn named<T: JsonSchema>(name: &str) -> (String, Value) {
    let mut value = serde_json::to_value(schema_for!(T)).expect("schemas serialize");
    if let Value::Object(map) = &mut value {
        map.insert("$id".into(), Value::String(format!("urn:ondt:{name}:v{SCHEMA_VERSION}")));
    }
    (name.to_string(), value)
}

/// Schemas of the core documents, sorted by name.
pub fn core_schemas() -> Vec<(String, Value)> {
    use crate::path::{ProvisionReport, ProvisionRequest};
    use crate::store::{HistoryLine, Lightpath, LightpathsDoc, QotRecord, Topology};
    use crate::telemetry::{DomainQot, FaultHypothesis, MarginForecast, SpanLossStep, TelemetrySample};
    use crate::trx::TrxCatalog;
    let mut out = vec![
        named::<DomainQot>("domain-qot"),
        named::<FaultHypothesis>("fault-hypothesis"),
        named::<HistoryLine>("history-line"),
        named::<Lightpath>("lightpath"),
        named::<LightpathsDoc>("lightpaths"),
        named::<MarginForecast>("margin-forecast"),
        named::<ProvisionReport>("provision-report"),
        named::<ProvisionRequest>("provision-request"),
        named::<QotRecord>("qot-record"),
        named::<SpanLossStep>("span-loss-step"),
        named::<TelemetrySample>("telemetry-sample"),
        named::<Topology>("topology"),
        named::<TrxCatalog>("trx-catalog"),
    ];
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Compares `schemas` with `<dir>/<name>.schema.json`, rewriting the files
/// instead when `ONDT_UPDATE_SCHEMAS` is set. Returns the names that drifted.
pub fn check_committed(dir: &std::path::Path, schemas: &[(String, Value)]) -> std::io::Result<Vec<String>> {
    let update = std::env::var_os("ONDT_UPDATE_SCHEMAS").is_some();
    let mut drifted = Vec::new();
    for (name, schema) in schemas {
        let path = dir.join(format!("{name}.schema.json"));
        let text = crate::doc::to_pretty(schema);
        if update {
            std::fs::create_dir_all(dir)?;
            std::fs::write(&path, &text)?;
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            drifted.push(name.clone());
        }
    }
    Ok(drifted)
}
