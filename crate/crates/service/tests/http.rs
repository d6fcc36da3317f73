mod support;

use axum::http::StatusCode;
use ondt_core::fixtures;
use ondt_core::store::DataDir;
use ondt_core::telemetry::{generate_fault_scenario, FaultScenarioConfig};
use serde_json::{json, Value};
use support::{app, assert_schema, call, json};

const WHATIF_400G: &str = r#"{"src":"T1","dst":"T4","requested_bitrate_gbps":400,"target_margin_db":1.0}"#;

#[tokio::test]
async fn topology_is_the_store_snapshot() {
    let store = fixtures::ring_store();
    let expected = store.topology_json();
    let (_, app) = app(store, None);
    let (status, body) = call(&app, "GET", "/topology", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, expected);
    assert_schema("topology", &json(&body));
}

#[tokio::test]
async fn infeasible_whatif_is_a_verdict_not_an_error() {
    let (_, app) = app(fixtures::ring_store(), None);
    let req = r#"{"src":"T1","dst":"T4","requested_bitrate_gbps":1600,"target_margin_db":0}"#;
    let (status, body) = call(&app, "POST", "/whatif", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["verdict"], json!({"status": "reject", "reason": "NoFeasibleTrx"}));
    assert_schema("provision-report", &v);
}

#[tokio::test]
async fn out_of_range_ber_is_422_invalid_ber() {
    let (_, app) = app(fixtures::ring_with_lightpaths(), None);
    let sample = r#"{"lp_id":"LP1","timestamp":10,"pre_fec_ber":0.7,"rx_power_dbm":-8,"source":"field"}"#;
    let (status, body) = call(&app, "POST", "/telemetry", Some(sample)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = json(&body);
    assert_eq!(v["code"], "InvalidBer");
    assert_eq!(v["path"], "/0/pre_fec_ber");
    assert_schema("api-error", &v);
}

#[tokio::test]
async fn malformed_bodies_name_the_field() {
    let (_, app) = app(fixtures::ring_store(), None);
    let req = r#"{"src":"T1","dst":"T4","requested_bitrate_gbps":"fast","target_margin_db":1}"#;
    let (status, body) = call(&app, "POST", "/whatif", Some(req)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = json(&body);
    assert_eq!((v["code"].as_str(), v["path"].as_str()), (Some("SchemaViolation"), Some("/requested_bitrate_gbps")));
}

#[tokio::test]
async fn unknown_things_are_404() {
    let (_, app) = app(fixtures::ring_store(), None);
    for (uri, code) in [
        ("/lightpaths/LP9", "UnknownLightpath"),
        ("/lightpaths/LP9/history", "UnknownLightpath"),
        ("/schema/nope", "UnknownSchema"),
        ("/no/such/thing", "NotFound"),
    ] {
        let (status, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(json(&body)["code"], code, "{uri}");
    }
}

#[tokio::test]
async fn whatif_then_commit_persists_and_guards_revision() {
    let dir = tempfile::tempdir().unwrap();
    let data = DataDir::new(dir.path());
    let store = fixtures::ring_store();
    data.save(&store).unwrap();
    let (state, app) = app(store, Some(data.clone()));

    let (_, report) = call(&app, "POST", "/whatif", Some(WHATIF_400G)).await;
    let report = json(&report);
    assert_eq!(report["verdict"]["status"], "accept");
    let id = report["proposed_id"].as_str().unwrap().to_string();

    // A tampered report is refused even at the right revision.
    let mut forged = report.clone();
    forged["new_lp"]["margin_db"] = json!(99.0);
    let body = json!({"report": forged}).to_string();
    let (status, err) = call(&app, "POST", &format!("/lightpaths/{id}/commit"), Some(&body)).await;
    assert_eq!((status, json(&err)["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("ReportMismatch")));

    let body = json!({"report": report, "timestamp": 5.0}).to_string();
    let (status, out) = call(&app, "POST", &format!("/lightpaths/{id}/commit"), Some(&body)).await;
    assert_eq!(status, StatusCode::CREATED, "{out}");
    let out = json(&out);
    assert_schema("commit-outcome", &out);
    assert_eq!(out["record"]["gsnr_est_db"], report["new_lp"]["gsnr_db"]);

    let (status, err) = call(&app, "POST", &format!("/lightpaths/{id}/commit"), Some(&body)).await;
    assert_eq!((status, json(&err)["code"].as_str()), (StatusCode::CONFLICT, Some("StaleReport")));

    let reloaded = data.load().unwrap();
    let live = state.snapshot();
    assert_eq!(reloaded.lightpaths_doc(), live.lightpaths_doc());
    assert_eq!(reloaded.history(&id).unwrap(), live.history(&id).unwrap());
}

#[tokio::test]
async fn every_endpoint_returns_schema_valid_json() {
    let (_, app) = app(fixtures::ring_with_lightpaths(), None);
    let sample = r#"[{"lp_id":"LP1","timestamp":10,"pre_fec_ber":1e-4,"rx_power_dbm":-8,"source":"field"}]"#;
    let (status, body) = call(&app, "POST", "/telemetry", Some(sample)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_schema("ingest-outcome", &json(&body));

    let span = r#"{"lp_id":"LP8","added_loss_db":[0,1,2]}"#;
    let (status, body) = call(&app, "POST", "/scenario/span-loss", Some(span)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_schema("span-loss-report", &json(&body));

    for (uri, schema) in [
        ("/lightpaths", "lightpaths"),
        ("/lightpaths/LP1", "lightpath"),
        ("/lightpaths/LP1/history", "history"),
        ("/faults", "fault-hypothesis"),
        ("/trx-catalog", "trx-catalog"),
        ("/domains/qot", "domain-export"),
        ("/report", "qot-report"),
        ("/report?lp=LP3", "qot-report"),
    ] {
        let (status, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::OK, "{uri}: {body}");
        assert_schema(schema, &json(&body));
    }

    // One sample is too few to forecast from.
    let (status, body) = call(&app, "GET", "/lightpaths/LP1/margin-forecast", None).await;
    assert_eq!((status, json(&body)["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("InsufficientHistory")));

    let (_, index) = call(&app, "GET", "/schema", None).await;
    let index = json(&index);
    assert_eq!(index["version"], 1);
    assert!(index["schemas"].as_object().unwrap().len() >= 20);
}

#[tokio::test]
async fn margin_forecast_over_http() {
    let (_, app) = app(fixtures::ring_with_lightpaths(), None);
    // LP8 is a 100G QPSK path; walk its BER up day by day.
    let samples: Vec<Value> = (0..12)
        .map(|d| {
            json!({"lp_id": "LP8", "timestamp": 86400.0 * (d as f64 + 1.0), "pre_fec_ber": 1e-6 * 2f64.powi(d),
                   "rx_power_dbm": -8.0, "source": "replayed"})
        })
        .collect();
    let (status, body) = call(&app, "POST", "/telemetry", Some(&Value::from(samples).to_string())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let (status, body) = call(&app, "GET", "/lightpaths/LP8/margin-forecast?threshold_db=1.5", None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let f = json(&body);
    assert_schema("margin-forecast", &f);
    assert!(f["slope_db_per_day"].as_f64().unwrap() < 0.0);
    assert_eq!(f["threshold_db"], 1.5);
}

#[tokio::test]
async fn faults_rank_the_injected_link_first() {
    let sc = generate_fault_scenario(&fixtures::dcx_mesh_store(), &FaultScenarioConfig { seed: 3, ..Default::default() })
        .unwrap();
    let (_, app) = app(sc.store, None);
    let (status, body) = call(&app, "GET", "/faults", None).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["ranked"][0]["link"], sc.fault_link.as_str());
}

#[tokio::test]
async fn empty_network_has_an_empty_fault_board() {
    let (_, app) = app(fixtures::ring_with_lightpaths(), None);
    let (_, body) = call(&app, "GET", "/faults", None).await;
    assert_eq!(json(&body)["ranked"], json!([]));
}

#[tokio::test]
async fn provision_backup_and_restore() {
    let (_, app) = app(fixtures::ring_store(), None);
    let (status, out) = call(&app, "POST", "/lightpaths", Some(WHATIF_400G)).await;
    assert_eq!(status, StatusCode::CREATED, "{out}");
    let id = json(&out)["lp_id"].as_str().unwrap().to_string();
    let (status, backups) = call(&app, "POST", &format!("/lightpaths/{id}/backups"), None).await;
    assert_eq!(status, StatusCode::OK, "{backups}");
    let backups = json(&backups);
    assert!(!backups.as_array().unwrap().is_empty());
    let (status, lp) = call(&app, "POST", &format!("/lightpaths/{id}/backups/0/activate"), None).await;
    assert_eq!(status, StatusCode::OK, "{lp}");
    assert_eq!(json(&lp)["route"], backups[0]["route"]);
    let (status, _) = call(&app, "DELETE", &format!("/lightpaths/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let (_, doc) = call(&app, "GET", "/lightpaths", None).await;
    assert_eq!(json(&doc)["lightpaths"], json!([]));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn readers_never_see_a_torn_store() {
    let (_, app) = app(fixtures::ring_store(), None);
    let reader = {
        let app = app.clone();
        tokio::spawn(async move {
            for _ in 0..200 {
                let (_, body) = call(&app, "GET", "/lightpaths", None).await;
                let v = json(&body);
                // Each commit bumps the revision once and adds one lightpath.
                assert_eq!(v["revision"].as_u64().unwrap() as usize, v["lightpaths"].as_array().unwrap().len());
            }
        })
    };
    for (src, dst) in [("T1", "T2"), ("T2", "T3"), ("T3", "T4"), ("T4", "T5"), ("T5", "T6")] {
        let req = json!({"src": src, "dst": dst, "requested_bitrate_gbps": 100, "target_margin_db": 0}).to_string();
        let (status, body) = call(&app, "POST", "/lightpaths", Some(&req)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
    }
    reader.await.unwrap();
}
