//! Output artifacts, file formats and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use macroreal_core::circuit::{GateLog, ScalingRow};
use macroreal_core::quasiprob::SphereDistribution;
use serde::Serialize;

use crate::config::{CommandConfig, CommandKind};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Numerical contract of the implementation; failure exits with code 2.
    Contract,
    /// Expected outcome taken from the config; reported only.
    Expectation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn contract(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), kind: CheckKind::Contract, passed, detail }
    }

    pub fn expectation(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), kind: CheckKind::Expectation, passed, detail }
    }
}

/// Everything a command produces; written to disk by [`write_run`] only.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
}

impl Artifacts {
    pub fn add_file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.add_file(name, s.into_bytes());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

pub fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

#[derive(Serialize)]
struct DistributionRow {
    theta: f64,
    phi: f64,
    weight: f64,
    value: f64,
}

/// Columns theta, phi, weight, value; one row per quadrature node.
pub fn distribution_csv(d: &SphereDistribution) -> Vec<u8> {
    let rows = d
        .grid()
        .nodes()
        .zip(d.values())
        .map(|((dir, weight), &value)| DistributionRow { theta: dir.theta(), phi: dir.phi(), weight, value });
    csv_bytes(rows)
}

pub fn scaling_csv(rows: &[ScalingRow]) -> Vec<u8> {
    csv_bytes(rows.iter().copied())
}

#[derive(Serialize)]
struct GateLine {
    interval: usize,
    kind: &'static str,
    qubits: Vec<usize>,
    angle: Option<f64>,
}

/// One JSON object per line: {interval, kind, qubits, angle}.
pub fn gate_log_jsonl(log: &GateLog) -> Vec<u8> {
    let mut out = Vec::new();
    for g in log.gates() {
        let line = GateLine { interval: g.interval, kind: g.kind.name(), qubits: g.kind.qubits(), angle: g.kind.angle() };
        serde_json::to_writer(&mut out, &line).expect("gate line");
        out.push(b'\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct CheckSummary {
    pub passed: usize,
    pub failed: usize,
    pub contract_failures: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub preset: Option<&'a str>,
    pub config: &'a CommandConfig,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: &'a [Check],
    pub summary: CheckSummary,
}

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_ECHO: &str = "config.json";

pub fn summarize(checks: &[Check]) -> CheckSummary {
    CheckSummary {
        passed: checks.iter().filter(|c| c.passed).count(),
        failed: checks.iter().filter(|c| !c.passed).count(),
        contract_failures: checks.iter().filter(|c| !c.passed && c.kind == CheckKind::Contract).count(),
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub struct RunInfo<'a> {
    pub kind: CommandKind,
    pub preset: Option<&'a str>,
    pub config: &'a CommandConfig,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub duration_seconds: f64,
}

/// Writes outputs, the config echo and finally the manifest. Returns the manifest path.
pub fn write_run(out: &Path, info: &RunInfo<'_>, artifacts: &Artifacts) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut outputs = Vec::new();
    for (name, bytes) in &artifacts.files {
        write_atomic(&out.join(name), bytes)?;
        outputs.push(name.clone());
    }
    let mut echo = info.config.to_json();
    echo.push('\n');
    write_atomic(&out.join(CONFIG_ECHO), echo.as_bytes())?;
    outputs.push(CONFIG_ECHO.into());
    let manifest = Manifest {
        tool: "macroreal",
        version: env!("CARGO_PKG_VERSION"),
        command: info.kind.name(),
        preset: info.preset,
        config: info.config,
        seed: info.seed,
        threads: info.threads,
        duration_seconds: info.duration_seconds,
        outputs,
        checks: &artifacts.checks,
        summary: summarize(&artifacts.checks),
    };
    let path = out.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv() {
        #[derive(Serialize)]
        struct R {
            x: f64,
        }
        let xs = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI];
        let text = String::from_utf8(csv_bytes(xs.iter().map(|&x| R { x }))).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, xs);
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn gate_lines_have_the_four_fields() {
        let log = macroreal_core::circuit::cat_protocol_plan(3, 0.25, 2).unwrap();
        let text = String::from_utf8(gate_log_jsonl(&log)).unwrap();
        assert_eq!(text.lines().count(), log.len());
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, serde_json::json!({"interval": 1, "kind": "rotate", "qubits": [0], "angle": 0.25}));
        let second: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(second["angle"], serde_json::Value::Null);
    }
}
