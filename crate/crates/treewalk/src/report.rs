//! Report, CSV and manifest emission.
//!
//! `report.json` holds only seed-determined content, so reruns are
//! byte-identical; wall-clock timings go to `manifest.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use treewalk_core::renewal::{Claim, Verdict};

use crate::suites::Series;

/// One checked claim as written to `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub id: String,
    pub anchor: String,
    pub estimate: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub verdict: &'static str,
    pub detail: String,
}

impl From<&Claim> for ClaimRecord {
    fn from(c: &Claim) -> Self {
        Self {
            id: c.id.clone(),
            anchor: c.anchor.clone(),
            estimate: finite(c.estimate),
            stderr: finite(c.stderr),
            tolerance: finite(c.tolerance),
            verdict: c.verdict.as_str(),
            detail: c.detail.clone(),
        }
    }
}

/// JSON has no infinities; non-finite values are written as -1.
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    pub claims: Vec<ClaimRecord>,
    pub data: BTreeMap<String, Value>,
    /// Set when the suite stopped on an error.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub realization: String,
    pub drift: String,
    pub notes: Vec<String>,
    pub suites: Vec<SuiteRecord>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.suites
            .iter()
            .all(|s| s.error.is_none() && s.claims.iter().all(|c| c.verdict != Verdict::Fail.as_str()))
    }
}

/// Notes carried by every report.
pub fn standard_notes() -> Vec<String> {
    vec![
        "finitely supported laws are never spread out; limits along the boundary rely on the abelian \
         roto-homothety stabilizer with contracted translations, and limits toward omega on a nonzero drift \
         with phi(g) -> +inf"
            .into(),
        "kernel estimates stop each trajectory once its height is past the cylinder level by the stop margin \
         in the drift direction; tail_bound is the measured number of visits in a post-stop extension"
            .into(),
    ]
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// `series,n,estimate,stderr,tail_bound`.
pub fn kernel_csv(series: &[Series]) -> String {
    let mut out = String::from("series,n,estimate,stderr,tail_bound\n");
    for s in series {
        for r in &s.rows {
            let e = &r.estimate;
            let _ = writeln!(
                out,
                "\"{}\",{},{},{},{}",
                s.name.replace('"', "'"),
                r.n,
                e.value,
                e.stderr,
                e.tail_bound
            );
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub config_hash: String,
    pub seed: u64,
    pub verdicts: BTreeMap<String, &'static str>,
    pub timings_ms: BTreeMap<String, u128>,
    pub outputs: Vec<String>,
}

pub const TOOL: &str = "treewalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
