use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use npisim_core::api::{self, ScenarioFile, SimRequest, SimResponse};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(req: Request<Body>) -> (StatusCode, Value) {
    let resp = npisim_cli::router().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

async fn post(body: impl Into<String>) -> (StatusCode, Value) {
    call(
        Request::post("/api/simulate")
            .header("content-type", "application/json")
            .body(Body::from(body.into()))
            .unwrap(),
    )
    .await
}

#[tokio::test]
async fn simulate_preset() {
    let (status, body) = post(r#"{"preset":"realistic"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["dates"].as_array().unwrap().len(), 214);
    for (name, series) in body["series"].as_object().unwrap() {
        assert_eq!(series.as_array().unwrap().len(), 214, "{name}");
    }
    for name in [
        "daily_confirmed",
        "cumulative_confirmed",
        "people_flow",
        "visits_normalized",
        "ewom_mass",
        "Susceptible",
    ] {
        assert!(body["series"].get(name).is_some(), "{name}");
    }
    assert_eq!(body["engine_version"], npisim_core::ENGINE_VERSION);
    assert_eq!(body["scenario"]["name"], "realistic");
}

#[tokio::test]
async fn non_binary_schedule_is_422() {
    let mut file = api::presets().remove(0);
    file.schedules.get_mut("stay_at_home").unwrap()[1].1 = 2.0;
    let (status, body) = post(serde_json::to_string(&SimRequest::scenario(file)).unwrap()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("stay_at_home"));
}

#[tokio::test]
async fn invariant_violations_are_422() {
    for body in [
        json!({}),
        json!({"preset": "bogus"}),
        json!({"preset": "realistic", "dt": 0.3}),
        json!({"preset": "realistic", "param_overrides": {"disease.apparent_ratio": 2.0}}),
    ] {
        let (status, _) = post(body.to_string()).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    }
}

#[tokio::test]
async fn malformed_body_is_400_with_path() {
    let (status, body) = post("{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());

    let (status, body) = post(r#"{"preset": 5}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["path"], "preset");

    let mut file = serde_json::to_value(api::presets().remove(0)).unwrap();
    file["start_date"] = json!("01/03/2020");
    let (status, body) = post(json!({ "scenario": file }).to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["path"], "scenario.start_date");

    let (status, body) = post(r#"{"preset":"realistic","horizn":10}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("horizn"));
}

#[tokio::test]
async fn engine_failure_is_500() {
    let body =
        json!({"preset": "realistic", "param_overrides": {"disease.transmission_scale": 1e308}});
    let (status, body) = post(body.to_string()).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert!(body["error"].as_str().unwrap().contains("engine"));
}

#[tokio::test]
async fn presets_lists_four() {
    let (status, body) = call(Request::get("/api/presets").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let presets: Vec<ScenarioFile> = serde_json::from_value(body).unwrap();
    let names: Vec<&str> = presets.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "realistic",
            "second_emergency",
            "pre_emptive_shorter",
            "exhaustive"
        ]
    );
    let stay = &presets[0].schedules["stay_at_home"];
    assert_eq!(stay[1].0.to_string(), "2020-04-08");
    assert_eq!(stay[1].1, 1.0);
}

#[tokio::test]
async fn healthz_reports_version() {
    let (status, body) = call(Request::get("/api/healthz").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["version"], npisim_core::ENGINE_VERSION);
}

#[tokio::test]
async fn simulate_is_idempotent() {
    let (_, a) = post(r#"{"preset":"pre_emptive_shorter"}"#).await;
    let (_, b) = post(r#"{"preset":"pre_emptive_shorter"}"#).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn cli_and_http_agree_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = api::presets().remove(1);
    file.param_overrides
        .insert("disease.transmission_scale".into(), 1.1);
    let path = dir.path().join("s.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_npisim"))
        .args([
            "simulate",
            "--format",
            "json",
            "--scenario",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cli: SimResponse = serde_json::from_slice(&out.stdout).unwrap();

    let (status, body) = post(serde_json::to_string(&SimRequest::scenario(file)).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let http: SimResponse = serde_json::from_value(body).unwrap();

    assert_eq!(cli.dates, http.dates);
    assert_eq!(
        cli.series.keys().collect::<Vec<_>>(),
        http.series.keys().collect::<Vec<_>>()
    );
    for (name, xs) in &cli.series {
        let ys = &http.series[name];
        assert!(
            xs.iter().zip(ys).all(|(x, y)| x.to_bits() == y.to_bits()),
            "{name}"
        );
    }
    // and both match the library directly
    let direct = api::simulate(&SimRequest::scenario(cli.scenario.clone())).unwrap();
    assert_eq!(direct.series, cli.series);
}
