//! Per-stage document and character accounting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Counts for one stage. `input_docs == output_docs + Σ rejections`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub input_docs: u64,
    pub output_docs: u64,
    /// Unicode scalars of document text entering the stage. Stages that see
    /// raw pages rather than text report 0.
    pub input_chars: u64,
    pub output_chars: u64,
    /// Rejected documents per rule id.
    pub rejections: BTreeMap<String, u64>,
    /// Non-rejecting counters (edits made, list sizes, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, u64>,
    /// Kept out of the serialized report so that it stays reproducible.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl StageStats {
    pub fn new(stage: &str) -> Self {
        Self {
            stage: stage.to_string(),
            ..Default::default()
        }
    }

    pub fn reject(&mut self, rule: &str) {
        *self.rejections.entry(rule.to_string()).or_default() += 1;
    }

    /// Registers a rule with a zero count so it shows up in the report.
    pub fn declare_rule(&mut self, rule: &str) {
        self.rejections.entry(rule.to_string()).or_default();
    }

    pub fn note(&mut self, key: &str, n: u64) {
        *self.notes.entry(key.to_string()).or_default() += n;
    }

    pub fn rejected(&self) -> u64 {
        self.rejections.values().sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.input_docs == self.output_docs + self.rejected()
    }

    /// Adds the counts of a later batch of the same stage.
    pub fn absorb(&mut self, other: &StageStats) {
        self.input_docs += other.input_docs;
        self.output_docs += other.output_docs;
        self.input_chars += other.input_chars;
        self.output_chars += other.output_chars;
        for (k, v) in &other.rejections {
            *self.rejections.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.notes {
            *self.notes.entry(k.clone()).or_default() += v;
        }
        self.wall_seconds += other.wall_seconds;
    }
}

/// The machine-readable report written next to a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    /// False when an archive ended early or a stage aborted.
    pub complete: bool,
    /// Problems that made the run incomplete.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    pub stages: Vec<StageStats>,
}

impl StatsReport {
    pub fn new() -> Self {
        Self {
            complete: true,
            ..Default::default()
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageStats> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// Appends another report's stages, e.g. when chaining single-stage runs.
    pub fn extend(&mut self, other: StatsReport) {
        self.complete &= other.complete;
        self.errors.extend(other.errors);
        self.stages.extend(other.stages);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Wall-clock seconds per stage, tab-separated.
    pub fn timings(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            let _ = writeln!(out, "{}\t{:.3}", s.stage, s.wall_seconds);
        }
        out
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>14} {:>14} {:>9}  rejections",
            "stage", "docs in", "docs out", "chars in", "chars out", "seconds"
        );
        for s in &self.stages {
            let rej: Vec<String> = s
                .rejections
                .iter()
                .filter(|(_, &v)| v > 0)
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(
                out,
                "{:<12} {:>10} {:>10} {:>14} {:>14} {:>9.3}  {}",
                s.stage,
                s.input_docs,
                s.output_docs,
                s.input_chars,
                s.output_chars,
                s.wall_seconds,
                rej.join(" ")
            );
        }
        if !self.complete {
            let _ = writeln!(out, "INCOMPLETE: {}", self.errors.join("; "));
        }
        out
    }
}
