//! Hostname block list: per-host hit statistics, list construction and
//! wildcard matching.
//!
//! Pattern grammar:
//! - `host.example` matches exactly that host;
//! - `*.example` matches any proper subdomain (`a.example`), not `example`;
//! - `*example` matches any host ending in `example`, including itself.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lists::PhraseMatcher;

/// Patterns that are always blocked.
pub const ALWAYS_BLOCKED: [&str; 2] = ["*wikipedia.org", "*.5ch.net"];

/// UT1 categories consulted when none are configured.
pub const DEFAULT_UT1_CATEGORIES: [&str; 3] = ["adult", "dating", "gambling"];

#[derive(Debug, Error)]
pub enum HostFilterError {
    #[error("invalid host pattern `{0}`")]
    InvalidPattern(String),
    #[error("cannot read UT1 category file {path}: {source}")]
    Ut1Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid block list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("host-filter threshold `{0}` must lie in (0, 1)")]
    Threshold(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HostPattern {
    Exact(String),
    /// `*.suffix`
    Subdomains(String),
    /// `*suffix`
    Suffix(String),
}

impl FromStr for HostPattern {
    type Err = HostFilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let invalid = || HostFilterError::InvalidPattern(s.to_string());
        if s.is_empty()
            || s.contains("://")
            || s.contains('/')
            || s.chars().any(|c| c.is_whitespace() || c.is_uppercase())
        {
            return Err(invalid());
        }
        let pattern = if let Some(rest) = s.strip_prefix("*.") {
            HostPattern::Subdomains(rest.to_string())
        } else if let Some(rest) = s.strip_prefix('*') {
            HostPattern::Suffix(rest.to_string())
        } else {
            HostPattern::Exact(s.to_string())
        };
        let body = match &pattern {
            HostPattern::Exact(b) | HostPattern::Subdomains(b) | HostPattern::Suffix(b) => b,
        };
        if body.is_empty() || body.contains('*') {
            return Err(invalid());
        }
        Ok(pattern)
    }
}

impl fmt::Display for HostPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostPattern::Exact(h) => f.write_str(h),
            HostPattern::Subdomains(s) => write!(f, "*.{s}"),
            HostPattern::Suffix(s) => write!(f, "*{s}"),
        }
    }
}

impl HostPattern {
    pub fn matches(&self, host: &str) -> bool {
        match self {
            HostPattern::Exact(h) => host == h,
            HostPattern::Subdomains(s) => host
                .strip_suffix(s.as_str())
                .and_then(|rest| rest.strip_suffix('.'))
                .is_some_and(|label| !label.is_empty()),
            HostPattern::Suffix(s) => host.ends_with(s.as_str()),
        }
    }
}

/// Why a pattern is on the list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ut1,
    DatingRatio,
    NgRatio,
    Manual,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Ut1 => "ut1",
            Provenance::DatingRatio => "dating_ratio",
            Provenance::NgRatio => "ng_ratio",
            Provenance::Manual => "manual",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ut1" => Ok(Provenance::Ut1),
            "dating_ratio" => Ok(Provenance::DatingRatio),
            "ng_ratio" => Ok(Provenance::NgRatio),
            "manual" => Ok(Provenance::Manual),
            other => Err(format!("unknown provenance `{other}`")),
        }
    }
}

/// Immutable set of host patterns with provenance. Matching looks up exact
/// hosts in a hash set and wildcard suffixes at every candidate position of
/// the host, so it costs O(len(host)) lookups regardless of list size.
#[derive(Debug, Clone, Default)]
pub struct BlockList {
    patterns: BTreeMap<HostPattern, BTreeSet<Provenance>>,
    exact: HashSet<String>,
    subdomains: HashSet<String>,
    suffixes: HashSet<String>,
}

impl PartialEq for BlockList {
    fn eq(&self, other: &Self) -> bool {
        self.patterns == other.patterns
    }
}

impl BlockList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: HostPattern, provenance: Provenance) {
        match &pattern {
            HostPattern::Exact(h) => self.exact.insert(h.clone()),
            HostPattern::Subdomains(s) => self.subdomains.insert(s.clone()),
            HostPattern::Suffix(s) => self.suffixes.insert(s.clone()),
        };
        self.patterns.entry(pattern).or_default().insert(provenance);
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> impl Iterator<Item = (&HostPattern, &BTreeSet<Provenance>)> {
        self.patterns.iter()
    }

    pub fn provenance(&self, pattern: &HostPattern) -> Option<&BTreeSet<Provenance>> {
        self.patterns.get(pattern)
    }

    /// True iff any pattern matches `host` (expected lowercase).
    pub fn is_blocked(&self, host: &str) -> bool {
        if self.exact.contains(host) {
            return true;
        }
        for (i, _) in host.char_indices() {
            let tail = &host[i..];
            if self.suffixes.contains(tail) {
                return true;
            }
            if i > 1 && host.as_bytes()[i - 1] == b'.' && self.subdomains.contains(tail) {
                return true;
            }
        }
        false
    }

    /// Text export: one pattern per line followed by a provenance comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (pattern, provenance) in &self.patterns {
            let tags: Vec<&str> = provenance.iter().map(|p| p.as_str()).collect();
            out.push_str(&format!("{pattern}\t# provenance: {}\n", tags.join(",")));
        }
        out
    }

    /// Parses [`BlockList::to_text`] output. Lines without a provenance
    /// comment are tagged `manual`; full-line comments are skipped.
    pub fn parse(text: &str) -> Result<Self, HostFilterError> {
        let mut list = BlockList::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (pattern, comment) = match line.split_once('#') {
                Some((p, c)) => (p.trim(), Some(c.trim())),
                None => (line, None),
            };
            let pattern: HostPattern = pattern.parse().map_err(|e: HostFilterError| {
                HostFilterError::Parse { line: n + 1, message: e.to_string() }
            })?;
            let tags: Vec<Provenance> = match comment.and_then(|c| c.strip_prefix("provenance:")) {
                Some(tags) => tags
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|message| HostFilterError::Parse { line: n + 1, message })?,
                None => vec![Provenance::Manual],
            };
            for tag in tags {
                list.insert(pattern.clone(), tag);
            }
        }
        Ok(list)
    }
}

/// Convenience wrapper around [`BlockList::is_blocked`].
pub fn host_blocked(host: &str, list: &BlockList) -> bool {
    list.is_blocked(host)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostStats {
    pub page_count: u64,
    pub dating_hit_pages: u64,
    pub ng_hit_pages: u64,
}

impl HostStats {
    pub fn merge(&mut self, other: &HostStats) {
        self.page_count += other.page_count;
        self.dating_hit_pages += other.dating_hit_pages;
        self.ng_hit_pages += other.ng_hit_pages;
    }
}

/// Per-host page counts and the number of pages containing at least one
/// dating-site name or NG expression.
pub fn accumulate_host_stats<'a, I>(
    documents: I,
    dating: &PhraseMatcher,
    ng: &PhraseMatcher,
) -> BTreeMap<String, HostStats>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut out: BTreeMap<String, HostStats> = BTreeMap::new();
    for (host, text) in documents {
        let page = HostStats {
            page_count: 1,
            dating_hit_pages: dating.is_match(text) as u64,
            ng_hit_pages: ng.is_match(text) as u64,
        };
        out.entry(host.to_string()).or_default().merge(&page);
    }
    out
}

/// Ratio thresholds for the statistics-based criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HostThresholds {
    pub dating_ratio: f64,
    pub ng_ratio: f64,
}

impl Default for HostThresholds {
    fn default() -> Self {
        Self {
            dating_ratio: 0.001,
            ng_ratio: 0.005,
        }
    }
}

impl HostThresholds {
    pub fn validate(&self) -> Result<(), HostFilterError> {
        if !(self.dating_ratio > 0.0 && self.dating_ratio < 1.0) {
            return Err(HostFilterError::Threshold("dating_ratio"));
        }
        if !(self.ng_ratio > 0.0 && self.ng_ratio < 1.0) {
            return Err(HostFilterError::Threshold("ng_ratio"));
        }
        Ok(())
    }
}

/// Hosts taken from UT1 category files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ut1Lists {
    pub categories: BTreeMap<String, BTreeSet<String>>,
}

impl Ut1Lists {
    /// Reads `<dir>/<category>/domains` for each requested category.
    pub fn load_dir<S: AsRef<str>>(dir: &Path, categories: &[S]) -> Result<Self, HostFilterError> {
        let mut lists = Ut1Lists::default();
        for category in categories {
            let path = dir.join(category.as_ref()).join("domains");
            let text = fs::read_to_string(&path)
                .map_err(|source| HostFilterError::Ut1Unreadable { path: path.clone(), source })?;
            let hosts = text
                .lines()
                .map(|l| l.trim().to_ascii_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect();
            lists.categories.insert(category.as_ref().to_string(), hosts);
        }
        Ok(lists)
    }
}

/// Builds the block list: UT1 hosts (and their subdomains), hosts whose
/// dating or NG page ratio strictly exceeds its threshold, and the
/// always-blocked patterns.
pub fn build_blocklist(
    stats: &BTreeMap<String, HostStats>,
    ut1: &Ut1Lists,
    thresholds: &HostThresholds,
) -> Result<BlockList, HostFilterError> {
    thresholds.validate()?;
    let mut list = BlockList::new();
    for hosts in ut1.categories.values() {
        for host in hosts {
            let Ok(HostPattern::Exact(h)) = host.parse::<HostPattern>() else {
                continue;
            };
            list.insert(HostPattern::Subdomains(h.clone()), Provenance::Ut1);
            list.insert(HostPattern::Exact(h), Provenance::Ut1);
        }
    }
    for (host, s) in stats {
        if s.page_count == 0 {
            continue;
        }
        let pages = s.page_count as f64;
        if s.dating_hit_pages as f64 / pages > thresholds.dating_ratio {
            list.insert(HostPattern::Exact(host.clone()), Provenance::DatingRatio);
        }
        if s.ng_hit_pages as f64 / pages > thresholds.ng_ratio {
            list.insert(HostPattern::Exact(host.clone()), Provenance::NgRatio);
        }
    }
    for p in ALWAYS_BLOCKED {
        list.insert(p.parse().expect("built-in patterns are valid"), Provenance::Manual);
    }
    Ok(list)
}
