use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Format, Global};

/// Everything needed to rerun a report.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    /// Resolved configuration, keyed by flag name. Feeding this object (or
    /// the whole report) back through `--config` reproduces the run.
    pub config: Value,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Manifest {
    pub fn new<C: Serialize>(subcommand: &'static str, seed: u64, config: &C, global: &Global) -> Result<Self> {
        let timestamp = if global.no_timestamp {
            None
        } else {
            Some(
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            )
        };
        let mut outputs = BTreeMap::new();
        if let Some(out) = &global.out {
            outputs.insert("report".to_string(), out.display().to_string());
        }
        Ok(Manifest {
            tool: "ccbell",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            config: serde_json::to_value(config)?,
            outputs,
            timestamp,
        })
    }

    pub fn add_output(&mut self, name: &str, path: &std::path::Path) {
        self.outputs.insert(name.to_string(), path.display().to_string());
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl Check {
    /// `|value - target| <= tolerance`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: (value - target).abs() <= tolerance,
            value,
            target,
            tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            value: f64::from(u8::from(passed)),
            target: 1.0,
            tolerance: 0.0,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, B: Serialize> {
    manifest: &'a Manifest,
    #[serde(flatten)]
    body: &'a B,
    checks: &'a [Check],
    status: &'static str,
}

pub trait TextSummary {
    fn text(&self) -> String;
}

pub struct Finished {
    pub passed: bool,
}

/// Writes the report: JSON to `--out` when given, and the chosen format to
/// stdout.
pub fn emit<B: Serialize + TextSummary>(
    global: &Global,
    manifest: &Manifest,
    body: &B,
    checks: &[Check],
) -> Result<Finished> {
    let passed = checks.iter().all(|c| c.passed);
    let envelope = Envelope {
        manifest,
        body,
        checks,
        status: if passed { "PASS" } else { "FAIL" },
    };
    let json = serde_json::to_string_pretty(&envelope)? + "\n";
    if let Some(out) = &global.out {
        std::fs::write(out, &json).with_context(|| format!("writing {}", out.display()))?;
    }
    match global.format {
        Format::Json => print!("{json}"),
        Format::Text => print!("{}", render_text(manifest, body, checks, passed)),
    }
    Ok(Finished { passed })
}

fn render_text<B: TextSummary>(manifest: &Manifest, body: &B, checks: &[Check], passed: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} :: {} (seed {})",
        manifest.tool, manifest.version, manifest.subcommand, manifest.seed
    );
    s.push_str(&body.text());
    if !checks.is_empty() {
        let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let _ = writeln!(s, "\nchecks:");
        for c in checks {
            let _ = writeln!(
                s,
                "  {:<width$}  {}  value {:>12.6}  target {:>12.6}  tol {:.3e}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.value,
                c.target,
                c.tolerance,
            );
        }
    }
    let _ = writeln!(s, "status: {}", if passed { "PASS" } else { "FAIL" });
    s
}

/// Reads a config file. A full report is accepted too, in which case its
/// manifest's config is used.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&PathBuf>, subcommand: &str) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    if let Some(manifest) = value.get("manifest") {
        if let Some(sub) = manifest.get("subcommand").and_then(Value::as_str) {
            anyhow::ensure!(
                sub == subcommand,
                "config {} was produced by `{sub}`, not `{subcommand}`",
                path.display()
            );
        }
        value = manifest.get("config").cloned().unwrap_or(Value::Null);
    }
    serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
}
