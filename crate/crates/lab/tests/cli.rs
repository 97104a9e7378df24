use std::fs;
use std::process::Command;

use grassflow::config::OUTPUT_DIR_ENV;
use tempfile::TempDir;

fn grassflow() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grassflow"));
    cmd.env_remove(OUTPUT_DIR_ENV);
    cmd
}

#[test]
fn presets_listing_is_stable() {
    let a = grassflow().arg("presets").output().unwrap();
    let b = grassflow().arg("presets").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for name in ["affine", "sine", "grim_reaper", "random_smooth", "hemisphere_test"] {
        assert!(text.contains(name), "{name}");
    }
    let hemisphere = text.split("hemisphere_test").nth(1).unwrap();
    assert!(hemisphere.contains("hemisphere preservation"));
}

#[test]
fn seed_flag_and_output_env_override_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("check.toml");
    fs::write(&cfg, "mode = \"hessian-check\"\noutput_dir = \"ignored\"\n[check]\nsamples = 20\n").unwrap();
    let out = tmp.path().join("out");
    let status = grassflow()
        .args(["hessian-check", "--config"])
        .arg(&cfg)
        .args(["--seed", "12"])
        .env(OUTPUT_DIR_ENV, &out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 12"));
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn config_errors_exit_with_status_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "mode = \"flow\"\n[gridd]\nn = 2\n").unwrap();
    let out = grassflow().args(["flow", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gridd"));

    let good = tmp.path().join("good.toml");
    fs::write(&good, "mode = \"grassmann-check\"\n").unwrap();
    let out = grassflow().args(["flow", "--config"]).arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "mode and subcommand must agree");
}

#[test]
fn flow_exit_status_follows_verdicts() {
    let tmp = TempDir::new().unwrap();
    let body = |tol: &str| {
        format!(
            "mode = \"flow\"\noutput_dir = {:?}\n[grid]\nn = 1\nm = 2\ncells = [32]\n[preset]\nname = \"sine\"\n\
             [run]\nt_end = 0.02\n[monitors.f2]\n{tol}",
            tmp.path().join("run").display().to_string()
        )
    };
    let cfg = tmp.path().join("flow.toml");
    fs::write(&cfg, body("")).unwrap();
    assert_eq!(grassflow().args(["flow", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    fs::write(&cfg, body("tolerance = 1e-300\n")).unwrap();
    assert_eq!(grassflow().args(["flow", "--config"]).arg(&cfg).status().unwrap().code(), Some(1));

    let report = tmp.path().join("report.toml");
    fs::write(
        &report,
        format!(
            "mode = \"report\"\noutput_dir = {:?}\n[report]\ninput_dir = {:?}\n",
            tmp.path().join("summary").display().to_string(),
            tmp.path().join("run").display().to_string()
        ),
    )
    .unwrap();
    let out = grassflow().args(["report", "--config"]).arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("| f2 | fail |"));
}
