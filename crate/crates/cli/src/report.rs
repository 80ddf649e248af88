//! Report documents: one per invocation, carrying the command, input
//! digests, every tolerance and margin behind a numeric verdict, and the
//! computed results. The machine format is deterministic JSON (sorted keys,
//! fixed field order); only the wall-time field varies between identical
//! runs.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Fully computed.
    Computed,
    /// Input could not be parsed or violates a precondition.
    InputError,
    /// The computation ran but a verdict stayed undetermined or an
    /// iteration did not converge.
    Undetermined,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Computed => 0,
            Outcome::InputError => 1,
            Outcome::Undetermined => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Computed => "computed",
            Outcome::InputError => "input-error",
            Outcome::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub command: String,
    pub status: String,
    /// Input files with their content digests.
    pub inputs: BTreeMap<String, String>,
    /// Tolerances, truncation degrees, horizons.
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: BTreeMap<String, serde_json::Value>,
    /// The only field allowed to differ between identical invocations.
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            format_version: crate::formats::FORMAT_VERSION,
            command: command.to_string(),
            status: Outcome::Computed.as_str().to_string(),
            inputs: BTreeMap::new(),
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn input(&mut self, name: &str, path: &std::path::Path, bytes: &[u8]) {
        use sha2::Digest;
        let digest = hex::encode(sha2::Sha256::digest(bytes));
        self.inputs
            .insert(name.to_string(), format!("{} sha256:{digest}", path.display()));
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn result(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn result_json(&mut self, key: &str, value: serde_json::Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn set_status(&mut self, outcome: Outcome) {
        self.status = outcome.as_str().to_string();
    }

    pub fn render_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command   {}\n", self.command));
        out.push_str(&format!("status    {}\n", self.status));
        for (k, v) in &self.inputs {
            out.push_str(&format!("input     {k} = {v}\n"));
        }
        for (k, v) in &self.parameters {
            out.push_str(&format!("param     {k} = {v}\n"));
        }
        for (k, v) in &self.results {
            match v {
                serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                    out.push_str(&format!("result    {k} = <structured; see machine format>\n"));
                }
                _ => out.push_str(&format!("result    {k} = {v}\n")),
            }
        }
        out.push_str(&format!("wall_time {:.3} ms\n", self.wall_time_ms));
        out
    }
}
