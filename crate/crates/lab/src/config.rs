//! Run configuration: TOML with flat sections, unknown keys rejected.
//!
//! ```toml
//! mode = "flow"            # flow | grassmann-check | hessian-check | report
//! seed = 0                 # optional, default 0
//! output_dir = "out"       # optional; GRASSFLOW_OUTPUT_DIR overrides it
//!
//! [grid]
//! n = 2
//! m = 2
//! cells = [64]             # one entry per axis, or one entry for all axes
//! lengths = [6.283185307179586]
//!
//! [preset]
//! name = "sine"
//! params = { amplitude = 0.5 }
//!
//! [run]
//! t_end = 0.1
//! snapshot_every = 0.01    # optional, default t_end / 10
//! cfl_safety = 0.5         # optional
//!
//! [monitors.f2]
//! tolerance = 1e-3         # optional override
//! [monitors.composition]
//! barrier = "v"
//! ```

use std::f64::consts::TAU;
use std::path::PathBuf;

use grassflow_core::grassmann::{Barrier, SEC_BALL_RADIUS};
use grassflow_core::mcf::{init_preset, GridSpec, PresetParams, CFL_SAFETY, MAX_CELLS, MIN_CELLS};
use grassflow_core::Error as CoreError;
use serde::{Deserialize, Serialize};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "GRASSFLOW_OUTPUT_DIR";

pub const DEFAULT_OUTPUT_DIR: &str = "grassflow-out";

/// The preset whose `seed` parameter defaults to the run seed.
const SEEDED_PRESET: &str = "random_smooth";

/// Snapshots per run when `snapshot_every` is omitted.
const DEFAULT_SNAPSHOTS: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("`{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("`{path}`: missing required key")]
    Missing { path: String },
    #[error("`{path}`: {message}")]
    OutOfRange { path: String, message: String },
}

impl ConfigError {
    fn range(path: &str, message: impl Into<String>) -> Self {
        ConfigError::OutOfRange { path: path.into(), message: message.into() }
    }

    /// The key path the error refers to.
    pub fn path(&self) -> &str {
        match self {
            ConfigError::Parse { path, .. } | ConfigError::Missing { path } | ConfigError::OutOfRange { path, .. } => {
                path
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Flow,
    GrassmannCheck,
    HessianCheck,
    Report,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Flow => "flow",
            Mode::GrassmannCheck => "grassmann-check",
            Mode::HessianCheck => "hessian-check",
            Mode::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitors: Option<MonitorsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub cells: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub params: PresetParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOnly {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionConfig {
    #[serde(default = "default_barrier")]
    pub barrier: Barrier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    /// Rows of the chart coordinate matrix of the centre plane; zero if omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_ball_radius")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct B2hConfig {
    #[serde(default = "default_b2h_barrier")]
    pub barrier: Barrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_radius")]
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub c0: f64,
    pub a: f64,
}

/// Enabled monitors; a monitor runs iff its section is present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<ToleranceOnly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition: Option<CompositionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2_inequality: Option<ToleranceOnly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confinable: Option<NoParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic_ball: Option<BallConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hemisphere: Option<NoParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2h: Option<B2hConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthConfig>,
}

impl MonitorsConfig {
    /// Names of the enabled monitors, in the fixed order they run and
    /// appear in `series.csv`.
    pub fn enabled(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let flags = [
            ("f2", self.f2.is_some()),
            ("composition", self.composition.is_some()),
            ("b2_inequality", self.b2_inequality.is_some()),
            ("confinable", self.confinable.is_some()),
            ("geodesic_ball", self.geodesic_ball.is_some()),
            ("hemisphere", self.hemisphere.is_some()),
            ("b2h", self.b2h.is_some()),
            ("curvature", self.curvature.is_some()),
            ("growth", self.growth.is_some()),
        ];
        for (name, on) in flags {
            if on {
                out.push(name);
            }
        }
        out
    }

    fn default_set() -> Self {
        MonitorsConfig {
            f2: Some(ToleranceOnly::default()),
            composition: Some(CompositionConfig { barrier: Barrier::V, tolerance: None }),
            b2_inequality: Some(ToleranceOnly::default()),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub input_dir: Option<PathBuf>,
}

fn default_barrier() -> Barrier {
    Barrier::V
}

fn default_b2h_barrier() -> Barrier {
    Barrier::V32
}

fn default_ball_radius() -> f64 {
    SEC_BALL_RADIUS
}

fn default_theta() -> f64 {
    0.5
}

fn default_radius() -> f64 {
    2.5
}

/// Overrides applied after parsing and before defaults are filled in.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// `--seed` from the command line plus the output directory from the
    /// environment.
    pub fn from_env(seed: Option<u64>) -> Self {
        Overrides { seed, output_dir: std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from) }
    }
}

/// Parse, fill defaults, validate. Errors name the offending key path.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| ConfigError::Parse { path: String::new(), message: e.message().to_string() })?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().to_string();
        match message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            Some(field) if path == "." => ConfigError::Missing { path: field.into() },
            Some(field) => ConfigError::Missing { path: format!("{path}.{field}") },
            None => ConfigError::Parse { path, message },
        }
    })?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &overrides.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    fill_defaults(&mut cfg)?;
    validate(&cfg)?;
    Ok(cfg)
}

/// TOML text that parses back to `cfg`.
pub fn echo(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configs always serialize")
}

fn require<T: Clone>(value: &Option<T>, path: &str) -> Result<T, ConfigError> {
    value.clone().ok_or_else(|| ConfigError::Missing { path: path.into() })
}

fn fill_defaults(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some(PathBuf::from(DEFAULT_OUTPUT_DIR));
    }
    match cfg.mode {
        Mode::Flow => {
            let grid = cfg.grid.as_mut().ok_or_else(|| ConfigError::Missing { path: "grid".into() })?;
            let n = require(&grid.n, "grid.n")?;
            let cells = require(&grid.cells, "grid.cells")?;
            if cells.len() == 1 {
                grid.cells = Some(vec![cells[0]; n]);
            }
            let lengths = grid.lengths.clone().unwrap_or_else(|| vec![TAU]);
            grid.lengths = Some(if lengths.len() == 1 { vec![lengths[0]; n] } else { lengths });

            let preset = cfg.preset.as_mut().ok_or_else(|| ConfigError::Missing { path: "preset".into() })?;
            let name = require(&preset.name, "preset.name")?;
            if name == SEEDED_PRESET && !preset.params.contains_key("seed") {
                // Seeds are f64 parameters of the preset; exact up to 2^53.
                preset.params.insert("seed".into(), cfg.seed as f64);
            }

            let run = cfg.run.as_mut().ok_or_else(|| ConfigError::Missing { path: "run".into() })?;
            let t_end = require(&run.t_end, "run.t_end")?;
            run.snapshot_every.get_or_insert(t_end / DEFAULT_SNAPSHOTS);
            run.cfl_safety.get_or_insert(CFL_SAFETY);

            if cfg.monitors.is_none() {
                cfg.monitors = Some(MonitorsConfig::default_set());
            }
        }
        Mode::GrassmannCheck | Mode::HessianCheck => {
            let (samples, v_max, tol) =
                if cfg.mode == Mode::GrassmannCheck { (10_000, 2.0, 1e-8) } else { (1_000, 3.0, 1e-5) };
            let check =
                cfg.check.get_or_insert(CheckConfig { samples: None, max_dim: None, v_max: None, tolerance: None });
            check.samples.get_or_insert(samples);
            check.max_dim.get_or_insert(3);
            check.v_max.get_or_insert(v_max);
            check.tolerance.get_or_insert(tol);
        }
        Mode::Report => {
            let report = cfg.report.as_ref().ok_or_else(|| ConfigError::Missing { path: "report".into() })?;
            require(&report.input_dir, "report.input_dir")?;
        }
    }
    Ok(())
}

fn positive(value: f64, path: &str) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::range(path, format!("must be finite and > 0, got {value}")))
    }
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let unused = |present: bool, path: &str| {
        if present {
            Err(ConfigError::range(path, format!("section is not used in mode `{}`", cfg.mode.as_str())))
        } else {
            Ok(())
        }
    };
    match cfg.mode {
        Mode::Flow => {
            unused(cfg.check.is_some(), "check")?;
            unused(cfg.report.is_some(), "report")?;
            let grid = cfg.grid.as_ref().expect("filled");
            let n = grid.n.expect("filled");
            let m = require(&grid.m, "grid.m")?;
            for (value, path) in [(n, "grid.n"), (m, "grid.m")] {
                if !(1..=3).contains(&value) {
                    return Err(ConfigError::range(path, format!("must be in 1..=3, got {value}")));
                }
            }
            let cells = grid.cells.as_ref().expect("filled");
            if cells.len() != n {
                return Err(ConfigError::range("grid.cells", format!("needs 1 or {n} entries, got {}", cells.len())));
            }
            if let Some(&bad) = cells.iter().find(|c| !(MIN_CELLS..=MAX_CELLS).contains(*c)) {
                return Err(ConfigError::range(
                    "grid.cells",
                    format!("cells per axis must be in {MIN_CELLS}..={MAX_CELLS}, got {bad}"),
                ));
            }
            let lengths = grid.lengths.as_ref().expect("filled");
            if lengths.len() != n {
                return Err(ConfigError::range(
                    "grid.lengths",
                    format!("needs 1 or {n} entries, got {}", lengths.len()),
                ));
            }
            for l in lengths {
                positive(*l, "grid.lengths")?;
            }

            // Building the initial state checks the preset name and parameters.
            let preset = cfg.preset.as_ref().expect("filled");
            let spec = grid_spec(grid).map_err(|e| ConfigError::range("grid", e.to_string()))?;
            init_preset(preset.name.as_deref().expect("filled"), &preset.params, &spec).map_err(|e| {
                let path = if matches!(e, CoreError::UnknownPreset(_)) { "preset.name" } else { "preset.params" };
                ConfigError::range(path, e.to_string())
            })?;

            let run = cfg.run.as_ref().expect("filled");
            positive(run.t_end.expect("filled"), "run.t_end")?;
            positive(run.snapshot_every.expect("filled"), "run.snapshot_every")?;
            let safety = run.cfl_safety.expect("filled");
            if !(safety > 0.0 && safety <= 1.0) {
                return Err(ConfigError::range("run.cfl_safety", format!("must be in (0, 1], got {safety}")));
            }

            let monitors = cfg.monitors.as_ref().expect("filled");
            let tolerances = [
                (monitors.f2.as_ref().and_then(|t| t.tolerance), "monitors.f2.tolerance"),
                (monitors.composition.as_ref().and_then(|t| t.tolerance), "monitors.composition.tolerance"),
                (monitors.b2_inequality.as_ref().and_then(|t| t.tolerance), "monitors.b2_inequality.tolerance"),
            ];
            for (tol, path) in tolerances {
                if let Some(tol) = tol {
                    positive(tol, path)?;
                }
            }
            if let Some(ball) = &monitors.geodesic_ball {
                positive(ball.radius, "monitors.geodesic_ball.radius")?;
                if let Some(center) = &ball.center {
                    if center.len() != n || center.iter().any(|row| row.len() != m) {
                        return Err(ConfigError::range(
                            "monitors.geodesic_ball.center",
                            format!("must be {n} rows of {m} entries"),
                        ));
                    }
                }
            }
            if let Some(b2h) = &monitors.b2h {
                if b2h.barrier == Barrier::V {
                    return Err(ConfigError::range("monitors.b2h.barrier", "must be `v32` or `sec`"));
                }
            }
            if let Some(c) = &monitors.curvature {
                if !(c.theta > 0.0 && c.theta < 1.0) {
                    return Err(ConfigError::range(
                        "monitors.curvature.theta",
                        format!("must be in (0, 1), got {}", c.theta),
                    ));
                }
                positive(c.r, "monitors.curvature.r")?;
            }
            if let Some(g) = &monitors.growth {
                positive(g.c0, "monitors.growth.c0")?;
                if !g.a.is_finite() {
                    return Err(ConfigError::range("monitors.growth.a", "must be finite"));
                }
            }
        }
        Mode::GrassmannCheck | Mode::HessianCheck => {
            for (present, path) in [
                (cfg.grid.is_some(), "grid"),
                (cfg.preset.is_some(), "preset"),
                (cfg.run.is_some(), "run"),
                (cfg.monitors.is_some(), "monitors"),
                (cfg.report.is_some(), "report"),
            ] {
                unused(present, path)?;
            }
            let check = cfg.check.as_ref().expect("filled");
            if check.samples == Some(0) {
                return Err(ConfigError::range("check.samples", "must be >= 1"));
            }
            let max_dim = check.max_dim.expect("filled");
            if !(1..=3).contains(&max_dim) {
                return Err(ConfigError::range("check.max_dim", format!("must be in 1..=3, got {max_dim}")));
            }
            let v_max = check.v_max.expect("filled");
            if !(v_max > 1.0 && v_max.is_finite()) {
                return Err(ConfigError::range("check.v_max", format!("must be finite and > 1, got {v_max}")));
            }
            if cfg.mode == Mode::GrassmannCheck && v_max > 2.0 {
                return Err(ConfigError::range("check.v_max", format!("the scan lives in v <= 2, got {v_max}")));
            }
            positive(check.tolerance.expect("filled"), "check.tolerance")?;
        }
        Mode::Report => {
            for (present, path) in [
                (cfg.grid.is_some(), "grid"),
                (cfg.preset.is_some(), "preset"),
                (cfg.run.is_some(), "run"),
                (cfg.monitors.is_some(), "monitors"),
                (cfg.check.is_some(), "check"),
            ] {
                unused(present, path)?;
            }
        }
    }
    Ok(())
}

/// Centre plane of the geodesic-ball monitor as a flat row-major matrix.
pub fn ball_center(ball: &BallConfig, n: usize, m: usize) -> Vec<f64> {
    match &ball.center {
        Some(rows) => rows.iter().flatten().copied().collect(),
        None => vec![0.0; n * m],
    }
}

/// Grid of a filled-in flow configuration.
pub fn grid_spec(grid: &GridConfig) -> grassflow_core::Result<GridSpec> {
    let n = grid.n.expect("filled");
    let m = grid.m.unwrap_or(1);
    GridSpec::new(n, m, grid.cells.as_deref().unwrap_or(&[]), grid.lengths.as_deref().unwrap_or(&[]))
}
