use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phguide::phspline::SplineExport;
use phguide::scenario::ScenarioConfig;
use phguide::sim::TRACE_HEADER;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn phguide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phguide")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn reported_length(out: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with("total length")).expect("length line");
    line.split_whitespace().nth(2).unwrap().parse().unwrap()
}

#[test]
fn plan_reports_length_and_writes_a_reloadable_spline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = phguide(&["plan", "--scenario", "2", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = reported_length(&stdout(&o));
    assert!((l - 127.2582).abs() < 1e-3, "{l}");

    let original = ScenarioConfig::builtin(2).unwrap().build_spline().unwrap();
    let reloaded = SplineExport::read(&dir.path().join("spline.json")).unwrap().to_spline().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let u = rng.gen_range(original.u_start()..=original.u_end());
        let (a, b) = (original.eval(u), reloaded.eval(u));
        for k in 0..3 {
            assert_eq!(format!("{:.9e}", a[k]), format!("{:.9e}", b[k]));
        }
    }
}

#[test]
fn straight_two_point_file_has_chord_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("line.json");
    fs::write(
        &cfg,
        r#"{
  "waypoints": [[1.0, 2.0, 3.0], [13.0, -2.0, 6.0]],
  "tangents": {"kind": "normalized_chord_pairs"},
  "initial": {"eta": [0.0, 0.0, 0.0]},
  "mode": "kinematic-extended"
}"#,
    )
    .unwrap();
    let o = phguide(&["plan", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let chord = (144.0f64 + 16.0 + 9.0).sqrt();
    let spline = SplineExport::read(&dir.path().join("spline.json")).unwrap().to_spline().unwrap();
    assert!((spline.total_length() - chord).abs() < 1e-6);
    assert!((reported_length(&stdout(&o)) - chord).abs() < 1e-4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"waypoints": [[0,0,0]], "tangents": {"kind": "cubic_spline"}, "initial": {"eta": [0,0,0]}, "mode": "dynamic"}"#).unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["plan", "--config", bad.to_str().unwrap(), "--out", d],
        vec!["plan", "--config", "/nonexistent/x.json", "--out", d],
        vec!["plan", "--scenario", "9", "--out", d],
        vec!["simulate", "--scenario", "1", "--mode", "warp", "--out", d],
        vec!["simulate", "--scenario", "1", "--current", "maybe", "--out", d],
        vec!["simulate", "--scenario", "1", "--dt", "-1", "--out", d],
    ] {
        let o = phguide(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig::builtin(1).unwrap();
    c.guidance.gamma = 1e300;
    c.dt = 1e3;
    let cfg = dir.path().join("wild.json");
    fs::write(&cfg, c.to_json().unwrap()).unwrap();
    let o = phguide(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = phguide(&["simulate", "--scenario", "1", "--mode", "kinematic-extended", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let cols = TRACE_HEADER.split(',').count();
    assert!(lines.all(|l| l.split(',').count() == cols));

    let s = summary(dir.path());
    let expected = [0.15, -0.2, 0.05];
    let err = s["final_estimate_error"].as_array().unwrap();
    for k in 0..3 {
        assert!(err[k].as_f64().unwrap().abs() < 0.01, "{k}: {} vs {}", err[k], expected[k]);
    }
    assert_eq!(s["converged"], Value::Bool(true));
    assert_eq!(s["lyapunov"]["violations"], 0);
    assert!(s["arclength_bench"]["ratio"].as_f64().unwrap() > 1.0);
}

#[test]
fn basic_mode_under_current_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = phguide(&["simulate", "--scenario", "1", "--mode", "kinematic-basic", "--current", "on", "--out", d]);
    assert!(o.status.success());
    let s = summary(dir.path());
    assert_eq!(s["converged"], Value::Bool(false));
    assert!(s["tail_min_error"].as_f64().unwrap() > 0.1);
}

#[test]
fn toa_pairs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = phguide(&["simulate", "--scenario", "3", "--toa-at", "22.72,45.43", "--out", d]);
    assert!(o.status.success());
    let s = summary(dir.path());
    let toa = s["toa"].as_array().unwrap();
    assert_eq!(toa.len(), 2);
    let spline = ScenarioConfig::builtin(3).unwrap().build_spline().unwrap();
    for (p, u) in toa.iter().zip([22.72, 45.43]) {
        let est = p["estimated"].as_f64().unwrap();
        assert!((est - spline.arc_length(u, spline.u_end()) / 0.4).abs() < 1e-9);
        assert!(p["simulated"].as_f64().is_some());
    }
}

#[test]
fn all_scenarios_write_separate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = phguide(&["simulate", "--all-scenarios", "--tmax", "60", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for id in 1..=3 {
        let sub = dir.path().join(format!("scenario_{id}"));
        assert!(sub.join("trace.csv").is_file());
        assert_eq!(summary(&sub)["stop"], "time_limit");
    }
}

#[test]
fn bench_reports_ratio_and_agreement() {
    let o = phguide(&["bench-arclength", "--scenario", "3", "--reps", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("speed-up"));
    let rel: f64 = out
        .lines()
        .find(|l| l.contains("max relative difference"))
        .and_then(|l| l.split_whitespace().last())
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel <= 1e-9, "{rel}");
}
