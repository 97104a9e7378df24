//! Scenario orchestration: one function per mode, all writing the same
//! three kinds of file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use grassflow_core::grassmann::{
    hess_bound_v32, hess_v, hess_v_lower_bound_gap, in_bjx, metric_at, v_of, GrassmannPoint,
};
use grassflow_core::mcf::{init_preset, run_with_safety, Frame, GraphState};
use grassflow_core::monitors::{
    check_b2_inequality, check_composition_identity, check_f2_identity, monitor_b2h, monitor_confinable,
    monitor_curvature_scaling, monitor_geodesic_ball, monitor_growth_bound, monitor_hemisphere, MonitorReport, Verdict,
};
use grassflow_core::oracle::{covariant_hessian_fd, MetricField};
use grassflow_core::sampling::{self, SampleRng};
use nalgebra::DMatrix;
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::config::{ball_center, echo, grid_spec, Mode, MonitorsConfig, RunConfig};
use crate::output::{verdict_table, write_json, Cell, Table, SERIES_COLUMNS};

/// Exit status of a scenario whose pass/fail checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status after a failed check, a solver blow-up or a non-finite output.
pub const EXIT_FAILED: i32 = 1;

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    /// Verdict word per monitor or check (`pass`, `fail`, `informational`,
    /// `error`).
    pub verdicts: BTreeMap<String, String>,
    /// Headline numbers, also recorded in the manifest.
    pub summary: BTreeMap<String, f64>,
    /// Solver or monitor errors, in the order they occurred.
    pub errors: Vec<String>,
}

impl ScenarioOutcome {
    fn new(output_dir: PathBuf) -> Self {
        ScenarioOutcome {
            exit_code: EXIT_OK,
            output_dir,
            verdicts: BTreeMap::new(),
            summary: BTreeMap::new(),
            errors: Vec::new(),
        }
    }

    fn finish(&mut self) {
        let failed = !self.errors.is_empty() || self.verdicts.values().any(|v| v == "fail" || v == "error");
        self.exit_code = if failed { EXIT_FAILED } else { EXIT_OK };
    }
}

/// Runs the configured mode and writes its files. `Err` means the scenario
/// could not run at all (I/O, unreadable report input); check failures are
/// reported through [`ScenarioOutcome::exit_code`].
pub fn run_scenario(cfg: &RunConfig) -> anyhow::Result<ScenarioOutcome> {
    let dir = cfg.output_dir.clone().expect("parse_config fills output_dir");
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let started = Instant::now();
    let mut outcome = ScenarioOutcome::new(dir.clone());
    let mut timings = BTreeMap::new();
    let mut extra = json!({});
    match cfg.mode {
        Mode::Flow => run_flow(cfg, &dir, &mut outcome, &mut timings, &mut extra)?,
        Mode::GrassmannCheck => run_grassmann_check(cfg, &dir, &mut outcome)?,
        Mode::HessianCheck => run_hessian_check(cfg, &dir, &mut outcome)?,
        Mode::Report => run_report(cfg, &dir, &mut outcome)?,
    }
    outcome.finish();
    timings.insert("total".to_string(), started.elapsed().as_secs_f64());

    let manifest = json!({
        "tool": "grassflow",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": grassflow_core::VERSION,
        "mode": cfg.mode.as_str(),
        "seed": cfg.seed,
        "config": cfg,
        "config_toml": echo(cfg),
        "timings_seconds": timings,
        "verdicts": outcome.verdicts,
        "summary": outcome.summary,
        "errors": outcome.errors,
        "exit_status": outcome.exit_code,
        "run": extra,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(outcome)
}

fn monitor_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("monitor_{name}.json"))
}

fn run_monitor(
    name: &str,
    frames: &[Frame],
    monitors: &MonitorsConfig,
    n: usize,
    m: usize,
) -> grassflow_core::Result<MonitorReport> {
    match name {
        "f2" => check_f2_identity(frames, monitors.f2.as_ref().and_then(|c| c.tolerance)),
        "composition" => {
            let c = monitors.composition.as_ref().expect("enabled");
            check_composition_identity(frames, c.barrier, c.tolerance)
        }
        "b2_inequality" => check_b2_inequality(frames, monitors.b2_inequality.as_ref().and_then(|c| c.tolerance)),
        "confinable" => monitor_confinable(frames),
        "geodesic_ball" => {
            let c = monitors.geodesic_ball.as_ref().expect("enabled");
            let center = GrassmannPoint::new(DMatrix::from_row_slice(n, m, &ball_center(c, n, m)));
            monitor_geodesic_ball(frames, &center, c.radius)
        }
        "hemisphere" => monitor_hemisphere(frames),
        "b2h" => monitor_b2h(frames, monitors.b2h.as_ref().expect("enabled").barrier),
        "curvature" => {
            let c = monitors.curvature.as_ref().expect("enabled");
            monitor_curvature_scaling(frames, c.theta, c.r)
        }
        "growth" => {
            let c = monitors.growth.as_ref().expect("enabled");
            monitor_growth_bound(frames, c.c0, c.a)
        }
        other => unreachable!("unknown monitor {other}"),
    }
}

/// `sup |B|² h` over nodes, or `None` where the barrier is undefined.
fn sup_weighted(b2: &[f64], h: &[Option<f64>]) -> Option<f64> {
    b2.iter().zip(h).try_fold(0.0f64, |acc, (b, h)| h.map(|h| acc.max(b * h)))
}

fn run_flow(
    cfg: &RunConfig,
    dir: &Path,
    outcome: &mut ScenarioOutcome,
    timings: &mut BTreeMap<String, f64>,
    extra: &mut Value,
) -> anyhow::Result<()> {
    let grid = cfg.grid.as_ref().expect("filled");
    let preset = cfg.preset.as_ref().expect("filled");
    let run = cfg.run.as_ref().expect("filled");
    let monitors = cfg.monitors.as_ref().expect("filled");
    let spec = grid_spec(grid)?;
    let preset_name = preset.name.clone().expect("filled");
    let s0: GraphState = init_preset(&preset_name, &preset.params, &spec)?;
    let (n, m) = (s0.n(), s0.m());

    let clock = Instant::now();
    let result = run_with_safety(
        &s0,
        run.t_end.expect("filled"),
        run.snapshot_every.expect("filled"),
        run.cfl_safety.expect("filled"),
    )?;
    timings.insert("solver".into(), clock.elapsed().as_secs_f64());
    if let Some(e) = &result.error {
        outcome.errors.push(format!("solver: {e}"));
    }
    let frames = &result.frames;
    *extra = json!({
        "preset": preset_name,
        "steps": result.steps,
        "snapshots": frames.len(),
        "t_reached": frames.last().map(|f| f.state.t),
        "solver_error": result.error.as_ref().map(|e| e.to_string()),
    });

    let clock = Instant::now();
    let mut reports: Vec<(&str, Option<MonitorReport>)> = Vec::new();
    for name in monitors.enabled() {
        match run_monitor(name, frames, monitors, n, m) {
            Ok(mut report) => {
                report.metadata.insert("preset".into(), preset_name.clone());
                report.metadata.insert("seed".into(), cfg.seed.to_string());
                write_json(&monitor_file(dir, name), &report)?;
                outcome.verdicts.insert(name.to_string(), report.verdict.as_str().to_string());
                for (key, value) in &report.summary {
                    outcome.summary.insert(format!("{name}.{key}"), *value);
                }
                reports.push((name, Some(report)));
            }
            Err(e) => {
                let message = e.to_string();
                write_json(&monitor_file(dir, name), &json!({ "name": name, "error": message, "seed": cfg.seed }))?;
                outcome.verdicts.insert(name.to_string(), "error".into());
                outcome.errors.push(format!("{name}: {message}"));
                reports.push((name, None));
            }
        }
    }
    timings.insert("monitors".into(), clock.elapsed().as_secs_f64());

    let column = |monitor: &str, key: &str, k: usize| -> Cell {
        reports
            .iter()
            .find(|(name, _)| *name == monitor)
            .and_then(|(_, r)| r.as_ref())
            .and_then(|r| r.series(key))
            .and_then(|s| s.get(k).copied())
            .into()
    };
    let mut header: Vec<String> = SERIES_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(reports.iter().map(|(name, _)| format!("verdict_{name}")));
    let mut table = Table::new(header);
    for (k, frame) in frames.iter().enumerate() {
        let g = &frame.geometry;
        let mut row: Vec<Cell> = vec![
            frame.state.t.into(),
            g.sup_delta().into(),
            g.min_delta().into(),
            g.sup_b2().into(),
            sup_weighted(&g.b2, &g.h_v32).into(),
            sup_weighted(&g.b2, &g.h_sec).into(),
            g.max_rho().into(),
            column("f2", "max_residual", k),
            column("composition", "max_residual", k),
            column("b2_inequality", "min_slack", k),
            column("curvature", "c_emp", k),
        ];
        row.extend(reports.iter().map(|(name, _)| Cell::Text(outcome.verdicts[*name].clone())));
        table.push(row);
    }
    fs::write(dir.join("series.csv"), table.to_csv())?;
    if !table.all_finite() {
        outcome.errors.push("series.csv contains non-finite values".into());
    }
    Ok(())
}

fn report_value(name: &str, verdict: Verdict, seed: u64, body: Value) -> Value {
    let mut v = json!({ "name": name, "verdict": verdict.as_str(), "seed": seed });
    if let (Some(target), Value::Object(fields)) = (v.as_object_mut(), body) {
        target.extend(fields);
    }
    v
}

fn run_grassmann_check(cfg: &RunConfig, dir: &Path, outcome: &mut ScenarioOutcome) -> anyhow::Result<()> {
    let check = cfg.check.as_ref().expect("filled");
    let (samples, max_dim) = (check.samples.expect("filled"), check.max_dim.expect("filled"));
    let (v_max, tol) = (check.v_max.expect("filled"), check.tolerance.expect("filled"));
    let mut rng = SampleRng::seed_from_u64(cfg.seed);
    let mut table = Table::new(["sample", "n", "m", "v", "g_xx", "gap", "v32_slack", "in_bjx"]);
    let (mut gap_violations, mut v32_violations, mut bjx_violations, mut v32_samples) =
        (0usize, 0usize, 0usize, 0usize);
    let (mut min_rel_gap, mut max_gap, mut min_rel_v32) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..samples {
        let (n, m) = sampling::random_dims(max_dim, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, v_max, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let v = v_of(&p);
        let g = metric_at(&p, &x, &x);
        let gap = hess_v_lower_bound_gap(&p, &x)?;
        if gap < -tol * g {
            gap_violations += 1;
        }
        min_rel_gap = min_rel_gap.min(gap / g);
        max_gap = max_gap.max(gap);
        let slack = if v < 2.0 {
            let s = hess_bound_v32(&p, &x)?;
            v32_samples += 1;
            if s < -tol * g {
                v32_violations += 1;
            }
            min_rel_v32 = min_rel_v32.min(s / g);
            Some(s)
        } else {
            None
        };
        let bjx = in_bjx(&p);
        if v < 2.0 && !bjx {
            bjx_violations += 1;
        }
        table.push(vec![
            (k as f64).into(),
            (n as f64).into(),
            (m as f64).into(),
            v.into(),
            g.into(),
            gap.into(),
            slack.into(),
            Cell::Text(bjx.to_string()),
        ]);
    }
    fs::write(dir.join("series.csv"), table.to_csv())?;
    let verdict = if gap_violations + v32_violations + bjx_violations == 0 { Verdict::Pass } else { Verdict::Fail };
    let body = json!({
        "samples": samples,
        "max_dim": max_dim,
        "v_max": v_max,
        "tolerance": tol,
        "gap_violations": gap_violations,
        "min_relative_gap": min_rel_gap,
        "max_gap": max_gap,
        "v32_samples": v32_samples,
        "v32_violations": v32_violations,
        "min_relative_v32_slack": min_rel_v32,
        "bjx_violations": bjx_violations,
    });
    write_json(&monitor_file(dir, "grassmann_check"), &report_value("grassmann_check", verdict, cfg.seed, body))?;
    outcome.verdicts.insert("grassmann_check".into(), verdict.as_str().into());
    outcome.summary.insert("gap_violations".into(), gap_violations as f64);
    outcome.summary.insert("v32_violations".into(), v32_violations as f64);
    outcome.summary.insert("bjx_violations".into(), bjx_violations as f64);
    outcome.summary.insert("min_relative_gap".into(), min_rel_gap);
    outcome.summary.insert("max_gap".into(), max_gap);
    if !table.all_finite() {
        outcome.errors.push("series.csv contains non-finite values".into());
    }
    Ok(())
}

fn run_hessian_check(cfg: &RunConfig, dir: &Path, outcome: &mut ScenarioOutcome) -> anyhow::Result<()> {
    let check = cfg.check.as_ref().expect("filled");
    let (samples, max_dim) = (check.samples.expect("filled"), check.max_dim.expect("filled"));
    let (v_max, tol) = (check.v_max.expect("filled"), check.tolerance.expect("filled"));
    let mut rng = SampleRng::seed_from_u64(cfg.seed);
    let mut table = Table::new(["sample", "n", "m", "v", "closed_form", "oracle", "abs_diff"]);
    let (mut violations, mut max_abs, mut max_scaled) = (0usize, 0.0f64, 0.0f64);
    for k in 0..samples {
        let (n, m) = sampling::random_dims(max_dim, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, v_max, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let closed = hess_v(&p, &x);
        let mf = MetricField::canonical(n, m);
        let oracle = covariant_hessian_fd(&mf, &|z| v_of(&GrassmannPoint::new(z.clone())), &p, &x)?;
        let diff = (closed - oracle).abs();
        let scaled = diff / closed.abs().max(1.0);
        if scaled.is_nan() || scaled > tol {
            violations += 1;
        }
        max_abs = max_abs.max(diff);
        max_scaled = max_scaled.max(scaled);
        table.push(vec![
            (k as f64).into(),
            (n as f64).into(),
            (m as f64).into(),
            v_of(&p).into(),
            closed.into(),
            oracle.into(),
            diff.into(),
        ]);
    }
    fs::write(dir.join("series.csv"), table.to_csv())?;
    let verdict = if violations == 0 { Verdict::Pass } else { Verdict::Fail };
    let body = json!({
        "samples": samples,
        "max_dim": max_dim,
        "v_max": v_max,
        "tolerance": tol,
        "violations": violations,
        "max_abs_diff": max_abs,
        "max_scaled_diff": max_scaled,
    });
    write_json(&monitor_file(dir, "hessian_check"), &report_value("hessian_check", verdict, cfg.seed, body))?;
    outcome.verdicts.insert("hessian_check".into(), verdict.as_str().into());
    outcome.summary.insert("violations".into(), violations as f64);
    outcome.summary.insert("max_scaled_diff".into(), max_scaled);
    if !table.all_finite() {
        outcome.errors.push("series.csv contains non-finite values".into());
    }
    Ok(())
}

/// Summarises an earlier run directory into `report.md`; the exit status
/// reflects the verdicts stored there.
fn run_report(cfg: &RunConfig, dir: &Path, outcome: &mut ScenarioOutcome) -> anyhow::Result<()> {
    let input = cfg.report.as_ref().and_then(|r| r.input_dir.clone()).expect("filled");
    let manifest_path = input.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", manifest_path.display()))?;
    let verdicts = manifest
        .get("verdicts")
        .and_then(Value::as_object)
        .ok_or_else(|| anyhow!("{} has no verdicts", manifest_path.display()))?;

    let mut rows = Vec::new();
    for (name, verdict) in verdicts {
        let verdict = verdict.as_str().unwrap_or("error").to_string();
        let detail = match fs::read_to_string(monitor_file(&input, name)) {
            Ok(text) => {
                let report: Value = serde_json::from_str(&text)?;
                if let Some(err) = report.get("error").and_then(Value::as_str) {
                    err.to_string()
                } else {
                    headline(&report)
                }
            }
            Err(_) => "report file missing".into(),
        };
        outcome.verdicts.insert(name.clone(), verdict.clone());
        rows.push((name.clone(), verdict, detail));
    }
    if let Some(errors) = manifest.get("errors").and_then(Value::as_array) {
        outcome.errors.extend(errors.iter().filter_map(Value::as_str).map(|s| format!("input run: {s}")));
    }
    let mut text = format!(
        "# grassflow run report\n\ninput: `{}`\nmode: {}\nseed: {}\n\n",
        input.display(),
        manifest.get("mode").and_then(Value::as_str).unwrap_or("?"),
        manifest.get("seed").map(Value::to_string).unwrap_or_default(),
    );
    text.push_str(&verdict_table(&rows));
    if !outcome.errors.is_empty() {
        text.push_str("\nerrors:\n");
        for e in &outcome.errors {
            text.push_str(&format!("- {e}\n"));
        }
    }
    fs::write(dir.join("report.md"), &text)?;
    print!("{text}");
    Ok(())
}

/// One-line summary of a monitor report.
fn headline(report: &Value) -> String {
    let mut parts = Vec::new();
    if let Some(tol) = report.get("tolerance").and_then(Value::as_f64) {
        parts.push(format!("tolerance {tol:.3e}"));
    }
    let source = report.get("summary").and_then(Value::as_object).or_else(|| report.as_object());
    if let Some(fields) = source {
        for (key, value) in fields {
            if let Some(x) = value.as_f64() {
                if key != "tolerance" && key != "seed" {
                    parts.push(format!("{key} {x:.6e}"));
                }
            }
        }
    }
    parts.join(", ")
}
