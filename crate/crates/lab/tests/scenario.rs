use std::fs;
use std::path::Path;

use grassflow::config::parse_config;
use grassflow::output::SERIES_COLUMNS;
use grassflow::run_scenario;
use tempfile::TempDir;

fn config(dir: &Path, body: &str) -> grassflow::RunConfig {
    parse_config(&format!("output_dir = {:?}\n{body}", dir.display().to_string())).unwrap()
}

const AFFINE: &str = r#"
mode = "flow"
[grid]
n = 2
m = 2
cells = [16]
[preset]
name = "affine"
params = { a11 = 0.4, a12 = -0.3, a21 = 0.2, a22 = 0.1, offset = 1.0 }
[run]
t_end = 0.05
snapshot_every = 0.01
[monitors.f2]
[monitors.composition]
[monitors.b2_inequality]
[monitors.confinable]
[monitors.geodesic_ball]
[monitors.b2h]
[monitors.curvature]
"#;

fn read_csv(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("series.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn affine_flow_has_vanishing_residuals() {
    let tmp = TempDir::new().unwrap();
    let outcome = run_scenario(&config(tmp.path(), AFFINE)).unwrap();
    assert_eq!(outcome.exit_code, 0, "{:?} {:?}", outcome.verdicts, outcome.errors);

    let rows = read_csv(tmp.path());
    let header = &rows[0];
    assert_eq!(&header[..SERIES_COLUMNS.len()], SERIES_COLUMNS.as_slice());
    assert_eq!(
        &header[SERIES_COLUMNS.len()..],
        [
            "verdict_f2",
            "verdict_composition",
            "verdict_b2_inequality",
            "verdict_confinable",
            "verdict_geodesic_ball",
            "verdict_b2h",
            "verdict_curvature"
        ]
    );
    assert_eq!(rows.len(), 1 + 6);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for row in &rows[1..] {
        for name in ["residual_F2_max", "residual_compid_max"] {
            let r: f64 = row[col(name)].parse().unwrap();
            assert!(r <= 1e-8, "{name} = {r}");
        }
        let sup_b2: f64 = row[col("sup_b2")].parse().unwrap();
        assert!(sup_b2 <= 1e-20);
        assert_eq!(row[col("verdict_f2")], "pass");
    }
    for name in ["f2", "composition", "b2_inequality", "confinable", "geodesic_ball", "b2h", "curvature"] {
        assert!(tmp.path().join(format!("monitor_{name}.json")).exists(), "{name}");
    }
}

#[test]
fn manifest_records_seed_versions_timings_and_echo() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), &format!("seed = 42\n{AFFINE}"));
    run_scenario(&cfg).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["mode"], "flow");
    assert_eq!(manifest["exit_status"], 0);
    assert!(manifest["version"].is_string() && manifest["core_version"].is_string());
    assert!(manifest["timings_seconds"]["solver"].as_f64().unwrap() >= 0.0);
    assert!(manifest["summary"]["curvature.max_c_emp"].is_number());
    let echoed = parse_config(manifest["config_toml"].as_str().unwrap()).unwrap();
    assert_eq!(echoed, cfg);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("monitor_f2.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["seed"], "42");
    assert_eq!(report["metadata"]["preset"], "affine");
}

#[test]
fn reruns_are_byte_identical() {
    let body = r#"
mode = "flow"
seed = 5
[grid]
n = 2
m = 1
cells = [16]
[preset]
name = "random_smooth"
params = { target_sup_delta = 1.8 }
[run]
t_end = 0.04
snapshot_every = 0.01
[monitors.f2]
[monitors.composition]
barrier = "v32"
[monitors.b2h]
"#;
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run_scenario(&config(a.path(), body)).unwrap();
    run_scenario(&config(b.path(), body)).unwrap();
    for file in ["series.csv", "monitor_f2.json", "monitor_composition.json", "monitor_b2h.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn grassmann_check_is_deterministic_and_clean() {
    let body = "mode = \"grassmann-check\"\n[check]\nsamples = 10000\n";
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = run_scenario(&config(a.path(), body)).unwrap();
    let second = run_scenario(&config(b.path(), body)).unwrap();
    assert_eq!(first.exit_code, 0);
    assert_eq!(first.summary["gap_violations"], 0.0);
    assert_eq!(first.summary, second.summary);
    assert_eq!(fs::read(a.path().join("series.csv")).unwrap(), fs::read(b.path().join("series.csv")).unwrap());
    assert_eq!(read_csv(a.path()).len(), 10_001);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("monitor_grassmann_check.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 0);
    assert!(report["max_gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn hessian_check_passes_and_seed_changes_samples() {
    let body = "mode = \"hessian-check\"\n[check]\nsamples = 100\n";
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(run_scenario(&config(a.path(), body)).unwrap().exit_code, 0);
    run_scenario(&config(b.path(), &format!("seed = 1\n{body}"))).unwrap();
    assert_ne!(fs::read(a.path().join("series.csv")).unwrap(), fs::read(b.path().join("series.csv")).unwrap());
}

#[test]
fn failing_monitor_gives_nonzero_exit() {
    let tmp = TempDir::new().unwrap();
    let body = AFFINE.replace("[monitors.f2]", "[monitors.f2]\ntolerance = 1e-300");
    let outcome = run_scenario(&config(tmp.path(), &body)).unwrap();
    assert_eq!(outcome.verdicts["f2"], "fail");
    assert_eq!(outcome.exit_code, 1);
}

#[test]
fn monitor_precondition_error_is_reported() {
    let tmp = TempDir::new().unwrap();
    let body = r#"
mode = "flow"
[grid]
n = 2
m = 1
cells = [16]
[preset]
name = "sine"
[run]
t_end = 0.02
[monitors.hemisphere]
[monitors.f2]
"#;
    let outcome = run_scenario(&config(tmp.path(), body)).unwrap();
    assert_eq!(outcome.verdicts["hemisphere"], "error");
    assert_eq!(outcome.verdicts["f2"], "pass");
    assert_eq!(outcome.exit_code, 1);
    let report = fs::read_to_string(tmp.path().join("monitor_hemisphere.json")).unwrap();
    assert!(report.contains("\"error\""));
}

#[test]
fn blow_up_flushes_partial_series() {
    let tmp = TempDir::new().unwrap();
    // A CFL safety of 1 with steep data is still stable; force a blow-up with
    // an enormous amplitude on a coarse grid instead.
    let body = r#"
mode = "flow"
[grid]
n = 1
m = 1
cells = [8]
[preset]
name = "sine"
params = { amplitude = 1e200 }
[run]
t_end = 1.0
[monitors.f2]
"#;
    let outcome = run_scenario(&config(tmp.path(), body)).unwrap();
    assert_eq!(outcome.exit_code, 1);
    assert!(!outcome.errors.is_empty());
    assert!(tmp.path().join("series.csv").exists());
    let manifest = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"exit_status\": 1"));
}

#[test]
fn report_mode_summarises_a_run() {
    let run_dir = TempDir::new().unwrap();
    run_scenario(&config(run_dir.path(), AFFINE)).unwrap();
    let out = TempDir::new().unwrap();
    let body = format!("mode = \"report\"\n[report]\ninput_dir = {:?}\n", run_dir.path().display().to_string());
    let outcome = run_scenario(&config(out.path(), &body)).unwrap();
    assert_eq!(outcome.exit_code, 0);
    assert_eq!(outcome.verdicts["f2"], "pass");
    let text = fs::read_to_string(out.path().join("report.md")).unwrap();
    assert!(text.contains("| f2 | pass |"));

    let missing =
        format!("mode = \"report\"\n[report]\ninput_dir = {:?}\n", out.path().join("nope").display().to_string());
    assert!(run_scenario(&config(out.path(), &missing)).is_err());
}
