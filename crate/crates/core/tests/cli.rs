use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ebitsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebitsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn fig3_csv_columns_and_zenith_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ebitsim(&["fig3", "--out", out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("fig3.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ground_km,eta_fs,eta_atm,db_fs,db_atm"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(first[2].parse::<f64>().unwrap(), 0.47);
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn json_format_and_flag_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ebitsim(&[
        "fig3",
        "--format",
        "json",
        "--wavelength-nm",
        "1550",
        "--altitude-km",
        "800",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(o.status.success());
    let rows: Value = serde_json::from_slice(&fs::read(tmp.path().join("fig3.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 201);
    let echo = &summary(tmp.path())["params_echo"];
    assert_eq!(echo["link"]["wavelength_m"].as_f64().unwrap(), 1550e-9);
    assert_eq!(echo["fig3"]["altitude_km"].as_f64().unwrap(), 800.0);
    assert_eq!(echo["earth"]["radius_km"].as_f64().unwrap(), 6371.0);
    assert!(echo.get("output").is_none());
}

#[test]
fn chain_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ebitsim(&["chain", "--altitude-km", "500", "--out", out_arg(tmp.path())]);
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("chain.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("h_km,D_km,k,rate_hz,rate_db_loss"));
    let disc: Value = serde_json::from_slice(&fs::read(tmp.path().join("chain_discontinuities.json")).unwrap()).unwrap();
    let marks = disc[0]["discontinuities"].as_array().unwrap();
    assert_eq!(marks[0]["from_count"], 1);
    assert_eq!(marks[0]["to_count"], 3);
}

#[test]
fn constellation_summary_and_rate_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ebitsim(&[
        "constellation",
        "--ogs1",
        "Los Angeles",
        "--ogs2",
        "37.77,-122.42",
        "--planes",
        "6",
        "--slots",
        "6",
        "--window-h",
        "6",
        "--step-s",
        "20",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(tmp.path());
    let max = s["max_rate_hz"].as_f64().unwrap();
    let mv = s["mean_visible_hz"].as_f64().unwrap();
    let ma = s["mean_all_hz"].as_f64().unwrap();
    assert!(max >= mv && mv >= ma && ma >= 0.0);
    assert_eq!(s["params_echo"]["constellation"]["planes"], 6);
    let text = fs::read_to_string(tmp.path().join("rates.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t_s,rate_hz,path_color,eps_plane,eps_slot"));
    assert_eq!(text.lines().count(), 1 + 6 * 180);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let rate: f64 = f[1].parse().unwrap();
        assert_eq!(rate > 0.0, !f[2].is_empty(), "{line}");
    }
}

#[test]
fn scenario_file_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("single.json");
    fs::write(
        &file,
        r#"{
  "kind": "single_sat",
  "ogs_pair": ["Los Angeles", {"latitude_deg": 34.42, "longitude_deg": -119.70}],
  "grid": {"altitudes_km": [500, 800], "inclinations_deg": [40, 80], "raans_deg": [0, 180], "phases_deg": [0]},
  "time": {"window_s": 21600, "step_s": 30}
}"#,
    )
    .unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = ebitsim(&["single-sat", "--scenario", file.to_str().unwrap(), "--out", out_arg(dir)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["rates.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let s = summary(&a);
    assert_eq!(s["per_altitude"].as_array().unwrap().len(), 2);
    assert!(s["best_point"]["index"].as_u64().unwrap() < 8);
}

#[test]
fn invalid_scenarios_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"kind":"fig3","surprise":true}"#, "fig3", "surprise"),
        (r#"{"kind":"chain_sweep"}"#, "fig3", "kind"),
        (r#"{"kind":"constellation","ogs_pair":["Atlantis","Tokyo"]}"#, "constellation", "ogs_pair[0]"),
        (r#"{"kind":"single_sat","ogs_pair":["Tokyo","Delhi"],"grid":{"altitudes_km":[]}}"#, "single-sat", "grid.altitudes_km"),
        (r#"{"kind":"fig3","link":{"eta_zenith":3}}"#, "fig3", "link"),
        (r#"not json"#, "fig3", "."),
    ];
    for (i, (doc, cmd, field)) in cases.into_iter().enumerate() {
        let file = tmp.path().join(format!("{i}.json"));
        fs::write(&file, doc).unwrap();
        let o = ebitsim(&[cmd, "--scenario", file.to_str().unwrap(), "--out", out_arg(tmp.path())]);
        assert_eq!(o.status.code(), Some(2), "{doc}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(&format!("`{field}`")), "{doc}: {err}");
    }
}

#[test]
fn io_failures_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    assert_eq!(ebitsim(&["fig3", "--scenario", missing.to_str().unwrap()]).status.code(), Some(3));
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = ebitsim(&["fig3", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
