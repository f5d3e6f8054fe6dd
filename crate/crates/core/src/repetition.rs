//! Repetition-removal rules.
//!
//! Thirteen document-level fractions: duplicated lines and paragraphs (by
//! count and by characters), the share of the most frequent character 2/3/4-
//! gram, and the share of character 5..10-gram occurrences that repeat.
//! A document is rejected when any fraction strictly exceeds its threshold.
//!
//! Conventions:
//! - lines are trimmed; empty lines are ignored for the line rules and
//!   separate paragraphs (maximal runs of non-empty lines);
//! - every member of a duplicate class counts toward the numerator;
//! - character denominators are the summed lengths of the lines or
//!   paragraphs considered;
//! - n-grams run over the raw text with line separators included;
//! - the most-frequent-n-gram share is 0 when no n-gram repeats.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::decision::FilterDecision;

pub const RULE_IDS: [&str; 13] = [
    "dup_line_frac",
    "dup_para_frac",
    "dup_line_char_frac",
    "dup_para_char_frac",
    "top_2gram_frac",
    "top_3gram_frac",
    "top_4gram_frac",
    "dup_5gram_frac",
    "dup_6gram_frac",
    "dup_7gram_frac",
    "dup_8gram_frac",
    "dup_9gram_frac",
    "dup_10gram_frac",
];

const MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepetitionThresholds {
    pub dup_line_frac: f64,
    pub dup_para_frac: f64,
    pub dup_line_char_frac: f64,
    pub dup_para_char_frac: f64,
    pub top_2gram_frac: f64,
    pub top_3gram_frac: f64,
    pub top_4gram_frac: f64,
    pub dup_5gram_frac: f64,
    pub dup_6gram_frac: f64,
    pub dup_7gram_frac: f64,
    pub dup_8gram_frac: f64,
    pub dup_9gram_frac: f64,
    pub dup_10gram_frac: f64,
}

impl Default for RepetitionThresholds {
    fn default() -> Self {
        Self::from_array([
            0.30, 0.30, 0.20, 0.20, 0.20, 0.18, 0.16, 0.15, 0.14, 0.13, 0.12, 0.11, 0.10,
        ])
    }
}

impl RepetitionThresholds {
    pub fn from_array(v: [f64; 13]) -> Self {
        Self {
            dup_line_frac: v[0],
            dup_para_frac: v[1],
            dup_line_char_frac: v[2],
            dup_para_char_frac: v[3],
            top_2gram_frac: v[4],
            top_3gram_frac: v[5],
            top_4gram_frac: v[6],
            dup_5gram_frac: v[7],
            dup_6gram_frac: v[8],
            dup_7gram_frac: v[9],
            dup_8gram_frac: v[10],
            dup_9gram_frac: v[11],
            dup_10gram_frac: v[12],
        }
    }

    pub fn as_array(&self) -> [f64; 13] {
        [
            self.dup_line_frac,
            self.dup_para_frac,
            self.dup_line_char_frac,
            self.dup_para_char_frac,
            self.top_2gram_frac,
            self.top_3gram_frac,
            self.top_4gram_frac,
            self.dup_5gram_frac,
            self.dup_6gram_frac,
            self.dup_7gram_frac,
            self.dup_8gram_frac,
            self.dup_9gram_frac,
            self.dup_10gram_frac,
        ]
    }

    /// Every threshold must lie strictly between 0 and 1.
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in RULE_IDS.iter().zip(self.as_array()) {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("repetition threshold `{name}` must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

/// Fraction of items (and of their characters) whose content occurs at
/// least twice.
fn duplicate_fractions(items: &[(String, usize)]) -> (f64, f64) {
    if items.is_empty() {
        return (0.0, 0.0);
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for (s, _) in items {
        *freq.entry(s.as_str()).or_default() += 1;
    }
    let mut dup_items = 0;
    let mut dup_chars = 0;
    let mut total_chars = 0;
    for (s, len) in items {
        total_chars += len;
        if freq[s.as_str()] >= 2 {
            dup_items += 1;
            dup_chars += len;
        }
    }
    let char_frac = if total_chars == 0 {
        0.0
    } else {
        dup_chars as f64 / total_chars as f64
    };
    (dup_items as f64 / items.len() as f64, char_frac)
}

fn lines_and_paragraphs(text: &str) -> (Vec<(String, usize)>, Vec<(String, usize)>) {
    let mut lines = Vec::new();
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let flush = |current: &mut Vec<&str>, paragraphs: &mut Vec<(String, usize)>| {
        if !current.is_empty() {
            let len = current.iter().map(|l| l.chars().count()).sum();
            paragraphs.push((current.join("\n"), len));
            current.clear();
        }
    };
    for raw in text.split('\n') {
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut current, &mut paragraphs);
        } else {
            lines.push((line.to_string(), line.chars().count()));
            current.push(line);
        }
    }
    flush(&mut current, &mut paragraphs);
    (lines, paragraphs)
}

/// Occurrence counts of every distinct n-gram, for each n in 2..=10.
///
/// Start positions are sorted once by their (up to) 10-character window;
/// positions sharing an n-character prefix are then contiguous for every
/// n ≤ 10, so each n needs only one linear scan.
fn ngram_group_sizes(chars: &[char]) -> [Vec<usize>; MAX_N + 1] {
    let mut groups: [Vec<usize>; MAX_N + 1] = Default::default();
    if chars.len() < 2 {
        return groups;
    }
    let window = |i: usize| &chars[i..(i + MAX_N).min(chars.len())];
    let mut starts: Vec<usize> = (0..chars.len()).collect();
    starts.sort_unstable_by(|&a, &b| window(a).cmp(window(b)));
    for (n, sizes) in groups.iter_mut().enumerate().skip(2) {
        let mut run_prefix: Option<&[char]> = None;
        let mut run = 0usize;
        for &i in &starts {
            if i + n > chars.len() {
                continue;
            }
            let gram = &chars[i..i + n];
            if run_prefix == Some(gram) {
                run += 1;
            } else {
                if run > 0 {
                    sizes.push(run);
                }
                run_prefix = Some(gram);
                run = 1;
            }
        }
        if run > 0 {
            sizes.push(run);
        }
    }
    groups
}

/// The thirteen repetition fractions, in rule order.
pub fn repetition_metrics(text: &str) -> [f64; 13] {
    let mut out = [0.0; 13];
    let (lines, paragraphs) = lines_and_paragraphs(text);
    let (line_frac, line_char_frac) = duplicate_fractions(&lines);
    let (para_frac, para_char_frac) = duplicate_fractions(&paragraphs);
    out[0] = line_frac;
    out[1] = para_frac;
    out[2] = line_char_frac;
    out[3] = para_char_frac;

    let chars: Vec<char> = text.chars().collect();
    let groups = ngram_group_sizes(&chars);
    for n in 2..=MAX_N {
        if chars.len() < n {
            continue;
        }
        let total = (chars.len() - n + 1) as f64;
        let sizes = &groups[n];
        out[n + 2] = if n <= 4 {
            let top = sizes.iter().copied().max().unwrap_or(0);
            if top >= 2 {
                top as f64 / total
            } else {
                0.0
            }
        } else {
            sizes.iter().filter(|&&c| c > 1).sum::<usize>() as f64 / total
        };
    }
    out
}

/// Rejects when any metric strictly exceeds its threshold; reports the first.
pub fn repetition_check(text: &str, thresholds: &RepetitionThresholds) -> FilterDecision {
    let metrics = repetition_metrics(text);
    for ((rule, value), limit) in RULE_IDS.iter().zip(metrics).zip(thresholds.as_array()) {
        if value > limit {
            return FilterDecision::reject(rule, value);
        }
    }
    FilterDecision::accept()
}
