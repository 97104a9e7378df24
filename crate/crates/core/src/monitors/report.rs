use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::mcf::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported but excluded from pass/fail accounting.
    Informational,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }
}

/// Outcome of one monitor over a snapshot series.
///
/// `predicate_held` records whether the monitored predicate held at every
/// snapshot within `tolerance`; `verdict` is `Pass`/`Fail` from it, or
/// `Informational` when the predicate is not a hard claim for this setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub name: String,
    pub verdict: Verdict,
    pub predicate_held: bool,
    pub tolerance: f64,
    pub times: Vec<f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl MonitorReport {
    pub(crate) fn new(name: &str, frames: &[Frame], tolerance: f64) -> Self {
        let mut metadata = BTreeMap::new();
        if let Some(first) = frames.first() {
            let spec = &first.state.spec;
            metadata.insert("n".into(), spec.n.to_string());
            metadata.insert("m".into(), spec.m.to_string());
            metadata.insert("cells".into(), format!("{:?}", &spec.cells[..spec.n]));
            metadata.insert("lengths".into(), format!("{:?}", &spec.lengths[..spec.n]));
            metadata.insert("dt_policy".into(), "cfl".into());
        }
        MonitorReport {
            name: name.to_string(),
            verdict: Verdict::Informational,
            predicate_held: true,
            tolerance,
            times: frames.iter().map(|f| f.state.t).collect(),
            series: BTreeMap::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
            metadata,
        }
    }

    /// Sets the verdict from `predicate_held`, as a hard or informational
    /// check.
    pub(crate) fn decide(&mut self, hard: bool) {
        self.verdict = match (hard, self.predicate_held) {
            (false, _) => Verdict::Informational,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        };
    }

    /// False only for a failed hard check.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn series(&self, key: &str) -> Option<&[f64]> {
        self.series.get(key).map(Vec::as_slice)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }
}
