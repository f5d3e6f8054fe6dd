//! Japanese text-quality rules and the NG-expression ratio filter.
//!
//! All character counting happens on NFKC-normalised text and ignores line
//! separators. Sentence segmentation runs on the original text so that
//! fullwidth terminators keep their unconditional split behaviour; each
//! sentence is then measured after normalisation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::FilterDecision;
use crate::lists::PhraseMatcher;
use crate::text::{char_count_without_newlines, is_line_separator, nfkc};

pub const RULE_MIN_CHARS: &str = "min_chars";
pub const RULE_HIRAGANA: &str = "hiragana_ratio";
pub const RULE_KATAKANA: &str = "katakana_ratio";
pub const RULE_JAPANESE: &str = "japanese_ratio";
pub const RULE_SENTENCE_MEAN: &str = "sentence_mean";
pub const RULE_LONGEST_SENTENCE: &str = "longest_sentence";
pub const RULE_ELLIPSIS: &str = "ellipsis_ratio";
pub const RULE_NG_RATIO: &str = "ng_ratio";

/// Rule identifiers in evaluation order; the NG ratio is checked last.
pub const RULE_IDS: [&str; 8] = [
    RULE_MIN_CHARS,
    RULE_HIRAGANA,
    RULE_KATAKANA,
    RULE_JAPANESE,
    RULE_SENTENCE_MEAN,
    RULE_LONGEST_SENTENCE,
    RULE_ELLIPSIS,
    RULE_NG_RATIO,
];

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("threshold `{name}` must lie in [0, 1], got {value}")]
    RatioOutOfRange { name: &'static str, value: f64 },
    #[error("threshold `{name}` must be positive")]
    NotPositive { name: &'static str },
    #[error("sentence_mean_min ({min}) exceeds sentence_mean_max ({max})")]
    EmptySentenceRange { min: f64, max: f64 },
}

/// Thresholds of the quality rules. Comparisons are strict: a document is
/// rejected only when it is *less than* a floor or *greater than* a ceiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityThresholds {
    pub min_chars: usize,
    pub hiragana_floor: f64,
    pub katakana_ceiling: f64,
    pub japanese_char_floor: f64,
    pub sentence_mean_min: f64,
    pub sentence_mean_max: f64,
    pub longest_sentence_max: usize,
    pub ellipsis_sentence_ceiling: f64,
    pub ng_char_ratio_ceiling: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        Self {
            min_chars: 400,
            hiragana_floor: 0.2,
            katakana_ceiling: 0.5,
            japanese_char_floor: 0.5,
            sentence_mean_min: 20.0,
            sentence_mean_max: 90.0,
            longest_sentence_max: 200,
            ellipsis_sentence_ceiling: 0.2,
            ng_char_ratio_ceiling: 0.05,
        }
    }
}

impl QualityThresholds {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        for (name, value) in [
            ("hiragana_floor", self.hiragana_floor),
            ("katakana_ceiling", self.katakana_ceiling),
            ("japanese_char_floor", self.japanese_char_floor),
            ("ellipsis_sentence_ceiling", self.ellipsis_sentence_ceiling),
            ("ng_char_ratio_ceiling", self.ng_char_ratio_ceiling),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ThresholdError::RatioOutOfRange { name, value });
            }
        }
        if self.min_chars == 0 {
            return Err(ThresholdError::NotPositive { name: "min_chars" });
        }
        if self.longest_sentence_max == 0 {
            return Err(ThresholdError::NotPositive {
                name: "longest_sentence_max",
            });
        }
        if !(self.sentence_mean_min > 0.0) {
            return Err(ThresholdError::NotPositive {
                name: "sentence_mean_min",
            });
        }
        if self.sentence_mean_min > self.sentence_mean_max {
            return Err(ThresholdError::EmptySentenceRange {
                min: self.sentence_mean_min,
                max: self.sentence_mean_max,
            });
        }
        Ok(())
    }
}

/// Script class of a character for ratio rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharClass {
    Hiragana,
    Katakana,
    Kanji,
    JapanesePunct,
    Other,
}

impl CharClass {
    pub const ALL: [CharClass; 5] = [
        CharClass::Hiragana,
        CharClass::Katakana,
        CharClass::Kanji,
        CharClass::JapanesePunct,
        CharClass::Other,
    ];

    pub fn is_japanese(self) -> bool {
        !matches!(self, CharClass::Other)
    }
}

/// Maps a scalar to its [`CharClass`]. Operates on the raw scalar; callers
/// normalise with NFKC first so halfwidth katakana lands in the katakana
/// block.
pub fn classify_char(c: char) -> CharClass {
    match c {
        // U+30A0 (double hyphen) and U+30FB (middle dot) are punctuation.
        '\u{30A0}' | '\u{30FB}' => CharClass::JapanesePunct,
        '\u{3041}'..='\u{309F}' => CharClass::Hiragana,
        '\u{30A1}'..='\u{30FF}' | '\u{31F0}'..='\u{31FF}' => CharClass::Katakana,
        '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}' => CharClass::Kanji,
        '\u{3000}'..='\u{3040}' | '\u{FF01}'..='\u{FF60}' => CharClass::JapanesePunct,
        _ => CharClass::Other,
    }
}

/// Per-class character counts of a text (line separators excluded).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub hiragana: usize,
    pub katakana: usize,
    pub kanji: usize,
    pub japanese_punct: usize,
    pub other: usize,
}

impl ClassCounts {
    pub fn of(text: &str) -> Self {
        let mut counts = Self::default();
        for c in text.chars().filter(|&c| !is_line_separator(c)) {
            match classify_char(c) {
                CharClass::Hiragana => counts.hiragana += 1,
                CharClass::Katakana => counts.katakana += 1,
                CharClass::Kanji => counts.kanji += 1,
                CharClass::JapanesePunct => counts.japanese_punct += 1,
                CharClass::Other => counts.other += 1,
            }
        }
        counts
    }

    pub fn total(&self) -> usize {
        self.hiragana + self.katakana + self.kanji + self.japanese_punct + self.other
    }

    pub fn japanese(&self) -> usize {
        self.hiragana + self.katakana + self.kanji + self.japanese_punct
    }
}

fn is_unconditional_terminator(c: char) -> bool {
    matches!(c, '。' | '！' | '？' | '｡')
}

fn is_ascii_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing_bracket(c: char) -> bool {
    matches!(c, '」' | '』' | '）' | ')' | '】' | '〕' | '"' | '\'' | '”' | '’')
}

/// Splits text into sentences.
///
/// A sentence ends after `。！？｡` (together with any closing brackets and
/// further terminators that immediately follow), after `.`, `!` or `?` when
/// the next character is whitespace or the end of text, and at every line
/// break. Terminators stay with their sentence; segments are trimmed and
/// empty ones dropped.
pub fn split_sentences<'a>(text: &'a str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    let push = |from: usize, to: usize, out: &mut Vec<&'a str>| {
        let seg = text[from..to].trim();
        if !seg.is_empty() {
            out.push(seg);
        }
    };
    while let Some((i, c)) = iter.next() {
        if is_line_separator(c) {
            push(start, i, &mut out);
            start = i + c.len_utf8();
            continue;
        }
        let ends = if is_unconditional_terminator(c) {
            true
        } else if is_ascii_terminator(c) {
            match iter.peek() {
                None => true,
                Some(&(_, next)) => next.is_whitespace(),
            }
        } else {
            false
        };
        if !ends {
            continue;
        }
        let mut end = i + c.len_utf8();
        if is_unconditional_terminator(c) {
            while let Some(&(j, next)) = iter.peek() {
                if is_unconditional_terminator(next) || is_closing_bracket(next) {
                    end = j + next.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
        }
        push(start, end, &mut out);
        start = end;
    }
    push(start, text.len(), &mut out);
    out
}

/// True when the sentence, after stripping trailing terminators, closing
/// brackets and whitespace, ends in `…`, `・・・` or `...`.
pub fn ends_with_ellipsis(sentence: &str) -> bool {
    let stripped = sentence.trim_end_matches(|c: char| {
        c.is_whitespace()
            || is_unconditional_terminator(c)
            || matches!(c, '!' | '?')
            || is_closing_bracket(c)
    });
    stripped.ends_with('…') || stripped.ends_with("・・・") || stripped.ends_with("...")
}

/// The quantities measured by [`quality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct QualityMetrics {
    pub chars: usize,
    pub hiragana_ratio: f64,
    pub katakana_ratio: f64,
    pub japanese_ratio: f64,
    pub sentence_count: usize,
    pub sentence_mean: f64,
    pub longest_sentence: usize,
    pub ellipsis_ratio: f64,
}

pub fn quality_metrics(text: &str) -> QualityMetrics {
    let normalized = nfkc(text);
    let counts = ClassCounts::of(&normalized);
    let total = counts.total();
    let ratio = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };

    let sentences = split_sentences(text);
    let lengths: Vec<usize> = sentences
        .iter()
        .map(|s| char_count_without_newlines(&nfkc(s)))
        .collect();
    let ellipsis = sentences.iter().filter(|s| ends_with_ellipsis(s)).count();
    let n = sentences.len();
    QualityMetrics {
        chars: total,
        hiragana_ratio: ratio(counts.hiragana),
        katakana_ratio: ratio(counts.katakana),
        japanese_ratio: ratio(counts.japanese()),
        sentence_count: n,
        sentence_mean: if n == 0 {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / n as f64
        },
        longest_sentence: lengths.iter().copied().max().unwrap_or(0),
        ellipsis_ratio: if n == 0 { 0.0 } else { ellipsis as f64 / n as f64 },
    }
}

/// Applies the seven quality rules in order and reports the first violation.
pub fn quality_check(text: &str, thresholds: &QualityThresholds) -> FilterDecision {
    let m = quality_metrics(text);
    let t = thresholds;
    if m.chars < t.min_chars {
        return FilterDecision::reject(RULE_MIN_CHARS, m.chars as f64);
    }
    if m.hiragana_ratio < t.hiragana_floor {
        return FilterDecision::reject(RULE_HIRAGANA, m.hiragana_ratio);
    }
    if m.katakana_ratio > t.katakana_ceiling {
        return FilterDecision::reject(RULE_KATAKANA, m.katakana_ratio);
    }
    if m.japanese_ratio < t.japanese_char_floor {
        return FilterDecision::reject(RULE_JAPANESE, m.japanese_ratio);
    }
    if m.sentence_mean < t.sentence_mean_min || m.sentence_mean > t.sentence_mean_max {
        return FilterDecision::reject(RULE_SENTENCE_MEAN, m.sentence_mean);
    }
    if m.longest_sentence > t.longest_sentence_max {
        return FilterDecision::reject(RULE_LONGEST_SENTENCE, m.longest_sentence as f64);
    }
    if m.ellipsis_ratio > t.ellipsis_sentence_ceiling {
        return FilterDecision::reject(RULE_ELLIPSIS, m.ellipsis_ratio);
    }
    FilterDecision::accept()
}

/// Fraction of characters covered by NG expressions (literal matching over
/// NFKC text, overlaps counted once). Empty text gives 0.
pub fn ng_expression_ratio<S: AsRef<str>>(text: &str, ng_list: &[S]) -> f64 {
    PhraseMatcher::nfkc(ng_list).coverage_ratio(text)
}

/// The seven rules followed by the NG-expression ratio rule.
pub fn quality_check_with_ng(
    text: &str,
    thresholds: &QualityThresholds,
    ng: &PhraseMatcher,
) -> FilterDecision {
    let decision = quality_check(text, thresholds);
    if !decision.accepted {
        return decision;
    }
    let ratio = ng.coverage_ratio(text);
    if ratio > thresholds.ng_char_ratio_ceiling {
        return FilterDecision::reject(RULE_NG_RATIO, ratio);
    }
    decision
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::RULE_NONE;
    use proptest::prelude::*;

    #[test]
    fn char_classes() {
        assert_eq!(classify_char('あ'), CharClass::Hiragana);
        assert_eq!(classify_char('ア'), CharClass::Katakana);
        assert_eq!(classify_char('ー'), CharClass::Katakana);
        assert_eq!(classify_char('ㇰ'), CharClass::Katakana);
        assert_eq!(classify_char('漢'), CharClass::Kanji);
        assert_eq!(classify_char('㐀'), CharClass::Kanji);
        assert_eq!(classify_char('、'), CharClass::JapanesePunct);
        assert_eq!(classify_char('。'), CharClass::JapanesePunct);
        assert_eq!(classify_char('「'), CharClass::JapanesePunct);
        assert_eq!(classify_char('・'), CharClass::JapanesePunct);
        assert_eq!(classify_char('！'), CharClass::JapanesePunct);
        assert_eq!(classify_char('A'), CharClass::Other);
        assert_eq!(classify_char(' '), CharClass::Other);
    }

    #[test]
    fn halfwidth_katakana_needs_normalisation() {
        assert_eq!(classify_char('ｱ'), CharClass::Other);
        assert_eq!(classify_char(nfkc("ｱ").chars().next().unwrap()), CharClass::Katakana);
        let counts = ClassCounts::of(&nfkc("ｱｲｳ"));
        assert_eq!(counts.katakana, 3);
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(split_sentences("今日は晴れ。明日は雨。"), vec!["今日は晴れ。", "明日は雨。"]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n \n").is_empty());
        assert_eq!(
            split_sentences("「はい。」と言った。本当？\n改行だけ\nWait... ok. 3.14 is pi"),
            vec!["「はい。」", "と言った。", "本当？", "改行だけ", "Wait...", "ok.", "3.14 is pi"]
        );
        assert_eq!(split_sentences("えっ！？そうなの"), vec!["えっ！？", "そうなの"]);
    }

    #[test]
    fn mixed_paragraph_matches_annotation() {
        let text = "吾輩は猫である。名前はまだ無い。\nどこで生れたかとんと見当がつかぬ\n何でも薄暗いじめじめした所で泣いていた事だけは記憶している。 Hello there! Fine.";
        let expected = vec![
            "吾輩は猫である。",
            "名前はまだ無い。",
            "どこで生れたかとんと見当がつかぬ",
            "何でも薄暗いじめじめした所で泣いていた事だけは記憶している。",
            "Hello there!",
            "Fine.",
        ];
        assert_eq!(split_sentences(text), expected);
    }

    #[test]
    fn ellipsis_forms() {
        assert!(ends_with_ellipsis("続きを読む…"));
        assert!(ends_with_ellipsis("続きを読む・・・"));
        assert!(ends_with_ellipsis("read more..."));
        assert!(ends_with_ellipsis("それで…。"));
        assert!(ends_with_ellipsis("「それで…」"));
        assert!(!ends_with_ellipsis("終わり。"));
        assert!(!ends_with_ellipsis("end."));
    }

    #[test]
    fn rule_one_boundary() {
        let text: String = "あ".repeat(399);
        let d = quality_check(&text, &QualityThresholds::default());
        assert_eq!(d, FilterDecision::reject(RULE_MIN_CHARS, 399.0));
    }

    #[test]
    fn katakana_only_fails_hiragana_first() {
        let text: String = "アイウエオ".repeat(100);
        let d = quality_check(&text, &QualityThresholds::default());
        assert_eq!(d.rule_id, RULE_HIRAGANA);
        assert_eq!(d.metric_value, 0.0);
    }

    #[test]
    fn newlines_are_not_characters() {
        let text = format!("{}\n{}", "あ".repeat(200), "い".repeat(199));
        let d = quality_check(&text, &QualityThresholds::default());
        assert_eq!(d.rule_id, RULE_MIN_CHARS);
        assert_eq!(d.metric_value, 399.0);
    }

    #[test]
    fn ng_ratio_boundary_and_overlap() {
        let mut text = "あ".repeat(95);
        text.push_str("ばかやろ");
        text.push('う');
        assert_eq!(text.chars().count(), 100);
        let r = ng_expression_ratio(&text, &["ばかやろう"]);
        assert_eq!(r, 0.05);
        assert!(!(r > QualityThresholds::default().ng_char_ratio_ceiling));
        assert_eq!(ng_expression_ratio("abab", &["aba", "bab"]), 1.0);
        assert_eq!(ng_expression_ratio("日本語の文章", &["英語"]), 0.0);
        assert_eq!(ng_expression_ratio("", &["x"]), 0.0);
    }

    #[test]
    fn validation() {
        assert!(QualityThresholds::default().validate().is_ok());
        let bad = QualityThresholds {
            hiragana_floor: 1.5,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(ThresholdError::RatioOutOfRange { .. })));
        let bad = QualityThresholds {
            sentence_mean_min: 100.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fluent_text_is_accepted() {
        let para = "今日は朝から良い天気だったので、近くの公園まで散歩に出かけることにしました。\
                    公園では子どもたちが元気に走り回っていて、見ているだけで楽しい気持ちになりました。";
        let text = para.repeat(6);
        let d = quality_check(&text, &QualityThresholds::default());
        assert_eq!(d.rule_id, RULE_NONE, "{d:?}");
    }

    proptest! {
        #[test]
        fn class_counts_partition_every_scalar(s in "\\PC{0,200}") {
            let counts = ClassCounts::of(&s);
            let scalars = s.chars().filter(|&c| !is_line_separator(c)).count();
            prop_assert_eq!(counts.total(), scalars);
        }

        #[test]
        fn accepted_texts_have_at_least_min_chars(s in "[あ-んア-ン一-龠。、]{0,600}") {
            let d = quality_check(&s, &QualityThresholds::default());
            if d.accepted {
                prop_assert!(char_count_without_newlines(&nfkc(&s)) >= 400);
            }
        }
    }
}
