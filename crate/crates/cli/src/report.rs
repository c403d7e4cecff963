//! Machine-readable run reports and their provenance manifest.

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use stochorder::ScalarMode;

/// Provenance attached to every output: embedded in JSON reports, written as
/// a `<path>.manifest.json` sidecar next to CSV and text files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub mode: ScalarMode,
    /// RFC 3339 UTC instant, second precision.
    pub timestamp: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, mode: ScalarMode) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            mode,
            timestamp: run_timestamp(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set so that reruns can be
/// byte-identical.
fn run_timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    pinned.unwrap_or_else(Utc::now).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Top-level JSON document emitted by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub result: serde_json::Value,
    /// Closed-form value of the reported quantity, when one exists.
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub manifest: RunManifest,
}

impl Report {
    pub fn new(
        command: &str,
        parameters: BTreeMap<String, String>,
        mode: ScalarMode,
        result: serde_json::Value,
        exact: Option<String>,
        z_score: Option<f64>,
    ) -> Self {
        let manifest = RunManifest::new(command, parameters.clone(), mode);
        Self { command: command.to_string(), parameters, result, exact, z_score, manifest }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is always serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_round_trips_byte_for_byte() {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), "3".to_string());
        let report = Report::new(
            "estimate",
            params,
            ScalarMode::Float64,
            serde_json::json!({"estimate": 0.1 + 0.2, "ci95": [0.25, 1e-300], "seed": u64::MAX}),
            Some("1/12".into()),
            Some(-1.25),
        );
        let text = report.to_json();
        let parsed: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(parsed.to_json(), text);
    }

    #[test]
    fn absent_z_score_is_omitted_and_exact_is_null() {
        let report = Report::new("x", BTreeMap::new(), ScalarMode::ExactRational, serde_json::json!(null), None, None);
        let text = report.to_json();
        assert!(!text.contains("z_score"));
        assert!(text.contains("\"exact\": null"));
        assert!(text.contains("\"mode\": \"rational\""));
    }
}
