//! Scenario runner for the `grassflow-core` kernel: configuration, flow and
//! sampling scenarios, and reproducible file output.
//!
//! A scenario writes into its output directory:
//!
//! * `manifest.json`: config echo, versions, timings and verdicts;
//! * `series.csv`: one row per snapshot (flow) or per sample (checks);
//! * one `monitor_<name>.json` per monitor or check.
//!
//! Only `series.csv` and the monitor reports are byte-stable across reruns;
//! the manifest carries wall-clock timings.

pub mod config;
pub mod output;
pub mod scenario;

pub use config::{parse_config, parse_config_with, ConfigError, Mode, Overrides, RunConfig};
pub use scenario::{run_scenario, ScenarioOutcome};
