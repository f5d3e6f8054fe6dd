//! Expression lists (NG expressions, dating-site names, footer markers) and
//! the literal multi-pattern matcher used to measure how much of a text they
//! cover.

use std::fs;
use std::io;
use std::path::Path;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};

use crate::text::{char_count_without_newlines, nfkc};

const NG_PLACEHOLDER: &str = include_str!("../data/ng_expressions.placeholder.txt");
const DATING_PLACEHOLDER: &str = include_str!("../data/dating_terms.placeholder.txt");
const FOOTER_MARKERS: &str = include_str!("../data/footer_markers.txt");

/// A list of literal expressions loaded from a UTF-8 file with one
/// expression per line. Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpressionList {
    expressions: Vec<String>,
    placeholder: bool,
}

impl ExpressionList {
    pub fn parse(src: &str) -> Self {
        let expressions = src
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self {
            expressions,
            placeholder: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn from_expressions<I, S>(expressions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            expressions: expressions
                .into_iter()
                .map(Into::into)
                .filter(|e: &String| !e.is_empty())
                .collect(),
            placeholder: false,
        }
    }

    /// The bundled stand-in NG list. Pipelines warn when running with it.
    pub fn placeholder_ng() -> Self {
        Self {
            placeholder: true,
            ..Self::parse(NG_PLACEHOLDER)
        }
    }

    /// The bundled stand-in dating-site list.
    pub fn placeholder_dating() -> Self {
        Self {
            placeholder: true,
            ..Self::parse(DATING_PLACEHOLDER)
        }
    }

    /// Default footer markers.
    pub fn default_footer_markers() -> Self {
        Self::parse(FOOTER_MARKERS)
    }

    pub fn is_placeholder(&self) -> bool {
        self.placeholder
    }

    pub fn expressions(&self) -> &[String] {
        &self.expressions
    }

    pub fn is_empty(&self) -> bool {
        self.expressions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.expressions.len()
    }
}

/// Literal multi-pattern matcher reporting overlapping matches.
#[derive(Debug, Clone)]
pub struct PhraseMatcher {
    automaton: Option<AhoCorasick>,
    normalize: bool,
}

impl PhraseMatcher {
    /// Matcher over NFKC-normalised patterns. Texts are NFKC-normalised before
    /// matching as well.
    pub fn nfkc<S: AsRef<str>>(patterns: &[S]) -> Self {
        let patterns: Vec<String> = patterns
            .iter()
            .map(|p| nfkc(p.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        Self::build(&patterns, false, true)
    }

    /// Matcher that compares patterns verbatim except for ASCII case.
    pub fn ascii_case_insensitive<S: AsRef<str>>(patterns: &[S]) -> Self {
        let patterns: Vec<&str> = patterns
            .iter()
            .map(AsRef::as_ref)
            .filter(|p| !p.is_empty())
            .collect();
        Self::build(&patterns, true, false)
    }

    fn build<S: AsRef<str>>(patterns: &[S], ascii_ci: bool, normalize: bool) -> Self {
        let automaton = if patterns.is_empty() {
            None
        } else {
            Some(
                AhoCorasickBuilder::new()
                    .match_kind(MatchKind::Standard)
                    .ascii_case_insensitive(ascii_ci)
                    .build(patterns.iter().map(AsRef::as_ref))
                    .expect("literal patterns always compile"),
            )
        };
        Self {
            automaton,
            normalize,
        }
    }

    fn prepared<'a>(&self, text: &'a str) -> std::borrow::Cow<'a, str> {
        if self.normalize {
            std::borrow::Cow::Owned(nfkc(text))
        } else {
            std::borrow::Cow::Borrowed(text)
        }
    }

    pub fn is_match(&self, text: &str) -> bool {
        match &self.automaton {
            Some(ac) => ac.is_match(self.prepared(text).as_ref()),
            None => false,
        }
    }

    /// Number of characters of `text` covered by at least one match.
    /// Overlapping matches are counted once.
    pub fn covered_chars(&self, text: &str) -> usize {
        let Some(ac) = &self.automaton else {
            return 0;
        };
        let text = self.prepared(text);
        covered_chars_in(ac, &text)
    }

    /// `covered_chars / characters`, with line separators excluded from the
    /// denominator. Empty text has ratio 0.
    pub fn coverage_ratio(&self, text: &str) -> f64 {
        let Some(ac) = &self.automaton else {
            return 0.0;
        };
        let text = self.prepared(text);
        let total = char_count_without_newlines(&text);
        if total == 0 {
            return 0.0;
        }
        covered_chars_in(ac, &text) as f64 / total as f64
    }
}

fn covered_chars_in(ac: &AhoCorasick, text: &str) -> usize {
    let mut spans: Vec<(usize, usize)> = ac
        .find_overlapping_iter(text)
        .map(|m| (m.start(), m.end()))
        .collect();
    if spans.is_empty() {
        return 0;
    }
    spans.sort_unstable();
    let mut covered = 0;
    let (mut cur_start, mut cur_end) = spans[0];
    for &(s, e) in &spans[1..] {
        if s <= cur_end {
            cur_end = cur_end.max(e);
        } else {
            covered += text[cur_start..cur_end].chars().count();
            cur_start = s;
            cur_end = e;
        }
    }
    covered + text[cur_start..cur_end].chars().count()
}
