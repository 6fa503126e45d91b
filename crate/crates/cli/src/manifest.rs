use std::path::{Path, PathBuf};
use std::time::Duration;

use rcm_core::numeric::fmt_real;
use serde::Serialize;

/// Record of one CLI run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: String,
    pub status: String,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            subcommand,
            parameters: reals_as_strings(
                serde_json::to_value(parameters).expect("arguments serialise"),
            ),
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            outputs: Vec::new(),
            wall_clock_seconds: String::new(),
            status: "ok".into(),
        }
    }

    pub fn finish(&mut self, elapsed: Duration, status: &str) {
        self.wall_clock_seconds = fmt_real(elapsed.as_secs_f64());
        self.status = status.into();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }
}

/// Rewrites non-integer JSON numbers as 17-digit decimal strings.
fn reals_as_strings(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => Value::String(fmt_real(n.as_f64().expect("f64 number"))),
        Value::Array(xs) => Value::Array(xs.into_iter().map(reals_as_strings).collect()),
        Value::Object(m) => Value::Object(
            m.into_iter()
                .map(|(k, x)| (k, reals_as_strings(x)))
                .collect(),
        ),
        other => other,
    }
}

/// `dir/stem.<suffix>` for an output path `dir/stem.ext`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

/// Adds a `manifest` key naming the manifest file to a JSON object.
pub fn with_manifest_ref(json: &str, manifest: &Path) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("core emits valid JSON");
    let name = manifest
        .file_name()
        .map(|s| s.to_string_lossy().into_owned());
    match &mut v {
        serde_json::Value::Object(map) => {
            map.insert("manifest".into(), name.into());
        }
        other => {
            v = serde_json::json!({ "manifest": name, "data": other.take() });
        }
    }
    serde_json::to_string_pretty(&v).expect("value serialises")
}
