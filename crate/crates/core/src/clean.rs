//! Minimal in-document edits: punctuation normalisation and footer trimming.
//! Neither operation ever drops a document.

use serde::{Deserialize, Serialize};

use crate::lists::PhraseMatcher;
use crate::text::is_alphanumeric_ascii_or_fullwidth;

const FULLWIDTH_COMMA: char = '，';
const IDEOGRAPHIC_COMMA: char = '、';
const FULLWIDTH_PERIOD: char = '．';
const IDEOGRAPHIC_PERIOD: char = '。';

/// Lines at the end of a document eligible for footer trimming.
pub const FOOTER_WINDOW: usize = 3;

/// Default share of a line's characters that markers must exceed.
pub const DEFAULT_FOOTER_COVERAGE: f64 = 0.3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub comma_normalized: bool,
    pub period_normalized: bool,
    pub footer_lines_removed: usize,
}

impl CleanReport {
    pub fn merge(self, other: CleanReport) -> CleanReport {
        CleanReport {
            comma_normalized: self.comma_normalized || other.comma_normalized,
            period_normalized: self.period_normalized || other.period_normalized,
            footer_lines_removed: self.footer_lines_removed + other.footer_lines_removed,
        }
    }
}

/// Replaces `from` with `to` unless the next character is alphanumeric.
/// Returns whether anything changed.
fn replace_unless_before_alnum(chars: &mut [char], from: char, to: char) -> bool {
    let mut changed = false;
    for i in 0..chars.len() {
        if chars[i] != from {
            continue;
        }
        let before_alnum = chars
            .get(i + 1)
            .is_some_and(|&c| is_alphanumeric_ascii_or_fullwidth(c));
        if !before_alnum {
            chars[i] = to;
            changed = true;
        }
    }
    changed
}

/// Switches Western-style fullwidth `，` / `．` to `、` / `。` in documents
/// where they outnumber the Japanese forms. Marks directly followed by an
/// ASCII or fullwidth alphanumeric (as in `３．１４`) are left alone.
pub fn normalize_punctuation(text: &str) -> (String, CleanReport) {
    let mut report = CleanReport::default();
    let count = |c: char| text.chars().filter(|&x| x == c).count();
    let commas = count(FULLWIDTH_COMMA) > count(IDEOGRAPHIC_COMMA);
    let periods = count(FULLWIDTH_PERIOD) > count(IDEOGRAPHIC_PERIOD);
    if !commas && !periods {
        return (text.to_string(), report);
    }
    let mut chars: Vec<char> = text.chars().collect();
    if commas {
        report.comma_normalized =
            replace_unless_before_alnum(&mut chars, FULLWIDTH_COMMA, IDEOGRAPHIC_COMMA);
    }
    if periods {
        report.period_normalized =
            replace_unless_before_alnum(&mut chars, FULLWIDTH_PERIOD, IDEOGRAPHIC_PERIOD);
    }
    (chars.into_iter().collect(), report)
}

/// Footer trimmer over a fixed marker list.
#[derive(Debug, Clone)]
pub struct FooterTrimmer {
    matcher: PhraseMatcher,
    coverage: f64,
}

impl FooterTrimmer {
    pub fn new<S: AsRef<str>>(markers: &[S]) -> Self {
        Self::with_coverage(markers, DEFAULT_FOOTER_COVERAGE)
    }

    pub fn with_coverage<S: AsRef<str>>(markers: &[S], coverage: f64) -> Self {
        Self {
            matcher: PhraseMatcher::ascii_case_insensitive(markers),
            coverage,
        }
    }

    fn is_footer_line(&self, line: &str) -> bool {
        let len = line.chars().count();
        len > 0 && self.matcher.covered_chars(line) as f64 / len as f64 > self.coverage
    }

    /// Removes footer lines among the last [`FOOTER_WINDOW`] lines, from the
    /// bottom up, stopping at the first line that is kept. Trailing blank
    /// lines are not counted and are dropped together with removed footers.
    pub fn trim(&self, text: &str) -> (String, CleanReport) {
        let mut report = CleanReport::default();
        let lines: Vec<&str> = text.split('\n').collect();
        let mut end = lines.len();
        while end > 0 && lines[end - 1].trim().is_empty() {
            end -= 1;
        }
        let floor = end.saturating_sub(FOOTER_WINDOW);
        let mut keep = end;
        while keep > floor && self.is_footer_line(lines[keep - 1]) {
            keep -= 1;
        }
        if keep == end {
            return (text.to_string(), report);
        }
        report.footer_lines_removed = end - keep;
        while keep > 0 && lines[keep - 1].trim().is_empty() {
            keep -= 1;
        }
        (lines[..keep].join("\n"), report)
    }
}

/// Convenience wrapper building a [`FooterTrimmer`] for one call.
pub fn trim_footer<S: AsRef<str>>(text: &str, markers: &[S]) -> (String, CleanReport) {
    FooterTrimmer::new(markers).trim(text)
}

/// Punctuation normalisation followed by footer trimming.
pub fn clean_text(text: &str, trimmer: &FooterTrimmer) -> (String, CleanReport) {
    let (normalized, r1) = normalize_punctuation(text);
    let (trimmed, r2) = trimmer.trim(&normalized);
    (trimmed, r1.merge(r2))
}
