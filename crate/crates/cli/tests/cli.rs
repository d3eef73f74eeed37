use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use npisim_core::api::{self, ScenarioFile, SimResponse};
use npisim_core::metrics::ingest_column;

fn npisim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npisim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_214_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = npisim(&["simulate", "--preset", "realistic", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 215);
    assert!(lines[0].starts_with("day,date,"));
    assert!(lines[1].starts_with("0,2020-03-01,"));
}

#[test]
fn unknown_preset_lists_valid_ones() {
    let o = npisim(&["simulate", "--preset", "bogus"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    for name in [
        "realistic",
        "second_emergency",
        "pre_emptive_shorter",
        "exhaustive",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn unwritable_output_fails() {
    let o = npisim(&[
        "simulate",
        "--preset",
        "realistic",
        "--out",
        "/nonexistent-dir/a.csv",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent-dir/a.csv"));
}

#[test]
fn preset_and_scenario_are_exclusive() {
    let o = npisim(&["simulate", "--preset", "realistic", "--scenario", "s.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(npisim(&["simulate"]).status.code(), Some(2));
}

#[test]
fn scenario_file_drives_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let exhaustive = api::presets()
        .into_iter()
        .find(|p| p.name == "exhaustive")
        .unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(&scenario, serde_json::to_string(&exhaustive).unwrap()).unwrap();
    let out = dir.path().join("s.csv");
    let o = npisim(&[
        "simulate",
        "--scenario",
        path_str(&scenario),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = fs::read_to_string(&out).unwrap();
    let stay = ingest_column("stay_at_home", &text, "stay_at_home").unwrap();
    let d = |s: &str| chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
    assert_eq!(stay.get(d("2020-03-28")), Some(0.0));
    assert_eq!(stay.get(d("2020-03-29")), Some(1.0));
}

#[test]
fn malformed_scenario_file_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.json");
    fs::write(
        &scenario,
        r#"{"name":"x","start_date":"March","schedules":{}}"#,
    )
    .unwrap();
    let o = npisim(&["simulate", "--scenario", path_str(&scenario)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("start_date"), "{}", stderr(&o));
}

#[test]
fn every_csv_column_reparses() {
    let o = npisim(&["simulate", "--preset", "second_emergency"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let resp = api::simulate(&api::SimRequest::preset("second_emergency")).unwrap();
    for (name, values) in &resp.series {
        let parsed = ingest_column(name, &text, name).unwrap();
        assert_eq!(parsed.len(), 214);
        assert!(
            parsed
                .values()
                .iter()
                .zip(values)
                .all(|(a, b)| a.to_bits() == b.to_bits()),
            "{name}"
        );
    }
}

#[test]
fn json_output_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("chart.svg");
    let o = npisim(&[
        "simulate",
        "--preset",
        "exhaustive",
        "--format",
        "json",
        "--svg",
        path_str(&svg),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let resp: SimResponse = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(resp.dates.len(), 214);
    assert_eq!(resp.scenario.name, "exhaustive");
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn overrides_and_horizon_flags() {
    let o = npisim(&[
        "simulate",
        "--preset",
        "realistic",
        "--set",
        "disease.bogus=1",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("disease.bogus"));
    let o = npisim(&["simulate", "--preset", "realistic", "--dt", "0.3"]);
    assert!(!o.status.success());
    let o = npisim(&[
        "simulate",
        "--preset",
        "realistic",
        "--dt",
        "0.25",
        "--horizon",
        "213",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 215);
}

fn compare_rows(args: &[&str]) -> Vec<Vec<String>> {
    let o = npisim(args);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn compare_exhaustive_is_lower() {
    let rows = compare_rows(&["compare", "realistic", "exhaustive", "--format", "csv"]);
    assert_eq!(
        rows[0],
        [
            "scenario",
            "cumulative_confirmed",
            "peak_daily_confirmed",
            "cumulative_visits",
            "mean_ewom_mass"
        ]
    );
    let cumulative = |r: &Vec<String>| r[1].parse::<f64>().unwrap();
    assert!(cumulative(&rows[2]) < cumulative(&rows[1]));
}

#[test]
fn compare_with_itself_is_identical() {
    let rows = compare_rows(&["compare", "realistic", "realistic", "--format", "csv"]);
    assert_eq!(rows[1], rows[2]);
}

#[test]
fn compare_metric_filter() {
    let rows = compare_rows(&[
        "compare",
        "realistic",
        "exhaustive",
        "--metric",
        "visits",
        "--format",
        "csv",
    ]);
    assert_eq!(rows[0], ["scenario", "cumulative_visits"]);
    let o = npisim(&["compare", "realistic", "exhaustive", "--metric", "ewom"]);
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert!(
        header.contains("mean_ewom_mass")
            && !header.contains("visits")
            && !header.contains("confirmed")
    );
}

#[test]
fn compare_needs_two_sources() {
    assert_eq!(npisim(&["compare", "realistic"]).status.code(), Some(2));
}

#[test]
fn fit_recovers_generating_scale() {
    let dir = tempfile::tempdir().unwrap();
    let observed = dir.path().join("obs.csv");
    let o = npisim(&[
        "simulate",
        "--preset",
        "realistic",
        "--set",
        "disease.transmission_scale=1.3",
        "--out",
        path_str(&observed),
    ]);
    assert!(o.status.success());
    let refit = dir.path().join("refit.json");
    let o = npisim(&[
        "fit",
        "--observed",
        path_str(&observed),
        "--column",
        "daily_confirmed",
        "--grid",
        "0.5:2.0:0.1",
        "--write-scenario",
        path_str(&refit),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.lines().last().unwrap().starts_with("best=1.3 loss=0 "),
        "{out}"
    );
    assert_eq!(out.lines().count(), 18);

    let file: ScenarioFile = serde_json::from_str(&fs::read_to_string(&refit).unwrap()).unwrap();
    assert_eq!(file.param_overrides["disease.transmission_scale"], 1.3);
    let o = npisim(&["simulate", "--scenario", path_str(&refit)]);
    let a = ingest_column("x", &stdout(&o), "daily_confirmed").unwrap();
    let b = ingest_column(
        "x",
        &fs::read_to_string(&observed).unwrap(),
        "daily_confirmed",
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn fit_usage_and_overlap_errors() {
    let dir = tempfile::tempdir().unwrap();
    let observed = dir.path().join("obs.csv");
    fs::write(&observed, "date,value\n2021-01-01,3\n2021-01-02,4\n").unwrap();
    let o = npisim(&[
        "fit",
        "--observed",
        path_str(&observed),
        "--grid",
        "2:1:0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = npisim(&["fit", "--observed", path_str(&observed)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("overlap"), "{}", stderr(&o));
}
