//! Rule-boundary document suites and brute-force oracles for the quality
//! and repetition filters.

use std::collections::HashMap;

// Thresholds as published, restated here so the suites do not depend on
// the library's defaults.
pub const MIN_CHARS: usize = 400;
pub const HIRAGANA_FLOOR: f64 = 0.2;
pub const KATAKANA_CEILING: f64 = 0.5;
pub const JAPANESE_FLOOR: f64 = 0.5;
pub const SENTENCE_MEAN: (f64, f64) = (20.0, 90.0);
pub const LONGEST_SENTENCE: usize = 200;
pub const ELLIPSIS_CEILING: f64 = 0.2;
pub const REPETITION_THRESHOLDS: [f64; 13] = [
    0.30, 0.30, 0.20, 0.20, 0.20, 0.18, 0.16, 0.15, 0.14, 0.13, 0.12, 0.11, 0.10,
];

const HIRAGANA: &str = "あいうえおかきくけこさしすせそたちつてとなにぬねのはひふへほまみむめもやゆよらりるれろわをん";
const KANJI: &str = "山川田中本日月火水木金土人口手目耳足空海森林石花草雨雪風春夏秋冬朝昼夜東西南北";
const KATAKANA: &str = "アイウエオカキクケコサシスセソタチツテトナニヌネノハヒフヘホマミムメモ";
const LATIN: &str = "abcdefghijklmnopqrstuvwxyz";

/// Character make-up of one sentence, terminator excluded.
#[derive(Clone, Copy, Default)]
struct Mix {
    hiragana: usize,
    katakana: usize,
    kanji: usize,
    latin: usize,
    ellipsis: bool,
}

fn mix(hiragana: usize, katakana: usize, kanji: usize) -> Mix {
    Mix {
        hiragana,
        katakana,
        kanji,
        ..Mix::default()
    }
}

fn take(pool: &str, n: usize, offset: usize) -> String {
    let chars: Vec<char> = pool.chars().collect();
    (0..n).map(|i| chars[(offset + i) % chars.len()]).collect()
}

fn document(sentences: &[Mix]) -> String {
    let mut out = String::new();
    for (i, m) in sentences.iter().enumerate() {
        out += &take(HIRAGANA, m.hiragana, i * 7);
        out += &take(KANJI, m.kanji, i * 5);
        out += &take(KATAKANA, m.katakana, i * 3);
        out += &take(LATIN, m.latin, i);
        if m.ellipsis {
            out += "・・・";
        }
        out.push('。');
        if i % 4 == 3 {
            out.push('\n');
        }
    }
    out
}

pub struct QualityCase {
    pub name: &'static str,
    pub text: String,
    /// Rule expected to reject the document, `None` for acceptance.
    pub expected: Option<&'static str>,
}

/// Sixteen documents, each sitting just inside or just outside one rule.
pub fn quality_suite() -> Vec<QualityCase> {
    let base = mix(22, 4, 13); // 39 characters + terminator
    let ten = |f: &dyn Fn(usize) -> Mix| (0..10).map(f).collect::<Vec<_>>();
    let mut cases = Vec::new();
    let mut case = |name, sentences: Vec<Mix>, expected| {
        cases.push(QualityCase {
            name,
            text: document(&sentences),
            expected,
        })
    };

    let mut short = vec![base; 10];
    short[9] = mix(21, 4, 13);
    case("chars_399", short, Some("min_chars"));
    case("chars_400", vec![base; 10], None);

    let hira = |n_high: usize, high: usize| {
        ten(&move |i| {
            let h = if i < n_high { high } else { high - 1 };
            mix(h, 4, 35 - h)
        })
    };
    case("hiragana_0.19", hira(6, 8), Some("hiragana_ratio"));
    case("hiragana_0.21", hira(4, 9), None);

    let kata = |n_high: usize, high: usize| {
        ten(&move |i| {
            let k = if i < n_high { high } else { high - 1 };
            mix(10, k, 29 - k)
        })
    };
    case("katakana_0.51", kata(4, 21), Some("katakana_ratio"));
    case("katakana_0.49", kata(6, 20), None);

    let latin = |n_high: usize, high: usize| {
        ten(&move |i| {
            let l = if i < n_high { high } else { high - 1 };
            Mix {
                latin: l,
                ..mix(10, 0, 29 - l)
            }
        })
    };
    case("japanese_0.49", latin(4, 21), Some("japanese_ratio"));
    case("japanese_0.51", latin(6, 20), None);

    case("sentence_mean_19", vec![mix(10, 0, 8); 22], Some("sentence_mean"));
    case("sentence_mean_21", vec![mix(11, 0, 9); 20], None);
    case("sentence_mean_89", vec![mix(45, 3, 40); 5], None);
    case("sentence_mean_91", vec![mix(46, 3, 41); 5], Some("sentence_mean"));

    let mut long = vec![base; 10];
    long.insert(5, mix(100, 10, 90));
    case("longest_201", long, Some("longest_sentence"));
    let mut long = vec![base; 10];
    long.insert(5, mix(100, 10, 88));
    case("longest_199", long, None);

    let ellipsis = |n: usize| {
        (0..100)
            .map(|i| {
                if i % 4 == 0 && i / 4 < n {
                    Mix {
                        ellipsis: true,
                        ..mix(12, 0, 9)
                    }
                } else {
                    mix(14, 0, 10)
                }
            })
            .collect::<Vec<_>>()
    };
    case("ellipsis_0.21", ellipsis(21), Some("ellipsis_ratio"));
    case("ellipsis_0.19", ellipsis(19), None);
    cases
}

/// Independent measurement of the suite documents, which use `。` as the
/// only terminator and break lines only after it.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityOracle {
    pub chars: usize,
    pub hiragana: f64,
    pub katakana: f64,
    pub japanese: f64,
    pub sentence_mean: f64,
    pub longest: usize,
    pub ellipsis: f64,
}

impl QualityOracle {
    pub fn measure(text: &str) -> Self {
        let chars: Vec<char> = text.chars().filter(|&c| c != '\n').collect();
        let count = |f: &dyn Fn(char) -> bool| chars.iter().filter(|&&c| f(c)).count();
        let hira = count(&|c| HIRAGANA.contains(c));
        let kata = count(&|c| KATAKANA.contains(c));
        let latin = count(&|c| c.is_ascii_lowercase());
        let sentences: Vec<String> = text
            .replace('\n', "")
            .split_inclusive('。')
            .map(str::to_string)
            .collect();
        let lengths: Vec<usize> = sentences.iter().map(|s| s.chars().count()).collect();
        let n = chars.len() as f64;
        Self {
            chars: chars.len(),
            hiragana: hira as f64 / n,
            katakana: kata as f64 / n,
            japanese: (chars.len() - latin) as f64 / n,
            sentence_mean: lengths.iter().sum::<usize>() as f64 / lengths.len() as f64,
            longest: lengths.iter().copied().max().unwrap_or(0),
            ellipsis: sentences.iter().filter(|s| s.ends_with("・・・。")).count() as f64
                / sentences.len() as f64,
        }
    }

    pub fn verdict(&self) -> Option<&'static str> {
        if self.chars < MIN_CHARS {
            Some("min_chars")
        } else if self.hiragana < HIRAGANA_FLOOR {
            Some("hiragana_ratio")
        } else if self.katakana > KATAKANA_CEILING {
            Some("katakana_ratio")
        } else if self.japanese < JAPANESE_FLOOR {
            Some("japanese_ratio")
        } else if self.sentence_mean < SENTENCE_MEAN.0 || self.sentence_mean > SENTENCE_MEAN.1 {
            Some("sentence_mean")
        } else if self.longest > LONGEST_SENTENCE {
            Some("longest_sentence")
        } else if self.ellipsis > ELLIPSIS_CEILING {
            Some("ellipsis_ratio")
        } else {
            None
        }
    }
}

/// The thirteen repetition fractions by direct counting.
pub fn repetition_oracle(text: &str) -> [f64; 13] {
    let mut lines = Vec::new();
    let mut paragraphs: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for raw in text.split('\n') {
        let line = raw.trim();
        if line.is_empty() {
            if !current.is_empty() {
                paragraphs.push(std::mem::take(&mut current));
            }
        } else {
            lines.push(line.to_string());
            current.push(line.to_string());
        }
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }
    let paragraphs: Vec<(String, usize)> = paragraphs
        .iter()
        .map(|p| (p.join("\n"), p.iter().map(|l| l.chars().count()).sum()))
        .collect();
    let lines: Vec<(String, usize)> = lines
        .into_iter()
        .map(|l| {
            let n = l.chars().count();
            (l, n)
        })
        .collect();

    fn dup(items: &[(String, usize)]) -> (f64, f64) {
        if items.is_empty() {
            return (0.0, 0.0);
        }
        let mut dup_items = 0usize;
        let mut dup_chars = 0usize;
        let mut total = 0usize;
        for (i, (s, len)) in items.iter().enumerate() {
            total += len;
            if items.iter().enumerate().any(|(j, (t, _))| i != j && s == t) {
                dup_items += 1;
                dup_chars += len;
            }
        }
        let chars = if total == 0 { 0.0 } else { dup_chars as f64 / total as f64 };
        (dup_items as f64 / items.len() as f64, chars)
    }

    let mut out = [0.0; 13];
    let (a, b) = dup(&lines);
    let (c, d) = dup(&paragraphs);
    out[0] = a;
    out[1] = c;
    out[2] = b;
    out[3] = d;
    let chars: Vec<char> = text.chars().collect();
    for n in 2..=10usize {
        if chars.len() < n {
            continue;
        }
        let total = chars.len() - n + 1;
        let mut counts: HashMap<&[char], usize> = HashMap::new();
        for i in 0..total {
            *counts.entry(&chars[i..i + n]).or_default() += 1;
        }
        out[n + 2] = if n <= 4 {
            let top = counts.values().copied().max().unwrap();
            if top >= 2 {
                top as f64 / total as f64
            } else {
                0.0
            }
        } else {
            counts.values().filter(|&&c| c > 1).sum::<usize>() as f64 / total as f64
        };
    }
    out
}

/// Index of the first rule whose fraction exceeds its threshold.
pub fn repetition_verdict(metrics: &[f64; 13]) -> Option<usize> {
    metrics
        .iter()
        .zip(REPETITION_THRESHOLDS)
        .position(|(&m, t)| m > t)
}

/// Supplies characters that never repeat within one document.
struct Fresh(u32);

impl Fresh {
    fn new() -> Self {
        Fresh(0x4E00)
    }

    fn take(&mut self, n: usize) -> String {
        let s = (0..n as u32).map(|i| char::from_u32(self.0 + i).unwrap()).collect();
        self.0 += n as u32;
        s
    }
}

/// 100 lines; `dups` of them are the same short line.
fn repeated_lines(dups: usize) -> String {
    let mut fresh = Fresh::new();
    let mut left = dups;
    (0..100)
        .map(|i| {
            if i % 2 == 1 && left > 0 {
                left -= 1;
                "ab".to_string()
            } else {
                fresh.take(20)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// 100 paragraphs; `dups` of them are the same one-line paragraph, the
/// rest have three fresh lines each.
fn repeated_paragraphs(dups: usize) -> String {
    let mut fresh = Fresh::new();
    let mut left = dups;
    (0..100)
        .map(|i| {
            if i % 2 == 1 && left > 0 {
                left -= 1;
                "ab".to_string()
            } else {
                (0..3).map(|_| fresh.take(20)).collect::<Vec<_>>().join("\n")
            }
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// `dups` duplicated lines of `len` characters (pairs, plus a third copy
/// when odd) among fresh lines of the given lengths. The second copy of each
/// pair is padded with spaces, which trimming removes but which keeps the
/// n-grams at the line boundaries distinct.
fn repeated_line_chars(dups: usize, len: usize, fresh_lens: &[usize], separator: &str) -> String {
    let mut fresh = Fresh::new();
    let classes: Vec<String> = (0..dups / 2).map(|_| fresh.take(len)).collect();
    let mut copies: Vec<String> = classes.clone();
    copies.extend(classes.iter().map(|c| format!(" {c} ")));
    if dups % 2 == 1 {
        copies.push(format!("{}  ", classes[0]));
    }
    let mut out = Vec::new();
    let mut next = copies.into_iter();
    for &n in fresh_lens {
        out.push(fresh.take(n));
        out.extend(next.next());
    }
    out.extend(next);
    out.join(separator)
}

/// `count` occurrences of an `n`-character gram separated by fresh
/// characters, `total` characters overall.
fn repeated_gram(n: usize, count: usize, total: usize) -> String {
    let mut fresh = Fresh::new();
    let gram: String = (0..n as u32).map(|i| char::from_u32(0x3041 + i).unwrap()).collect();
    let filler = total - n * count;
    (0..count)
        .map(|i| gram.clone() + &fresh.take(filler / count + usize::from(i < filler % count)))
        .collect()
}

/// `pairs` fresh segments of `len` characters, each occurring twice, with
/// fresh separators; `total` characters overall.
fn repeated_segments(len: usize, pairs: usize, total: usize) -> String {
    let mut fresh = Fresh::new();
    let segments: Vec<String> = (0..pairs).map(|_| fresh.take(len)).collect();
    let parts: Vec<&String> = segments.iter().chain(&segments).collect();
    let filler = total - 2 * len * pairs;
    parts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.to_string() + &fresh.take(filler / parts.len() + usize::from(i < filler % parts.len()))
        })
        .collect()
}

pub struct RepetitionCase {
    pub name: String,
    /// Index of the rule the document is built around.
    pub rule: usize,
    pub text: String,
    /// Index of the first violated rule, `None` for acceptance.
    pub expected: Option<usize>,
}

/// Two documents per rule: one just above its threshold (while every earlier
/// rule passes) and one at or just below it (while every rule passes).
///
/// A duplicated paragraph consists of duplicated lines, so the paragraph
/// character fraction never exceeds the line character fraction; with equal
/// thresholds the paragraph rule's reject case is therefore reported by the
/// line rule.
pub fn repetition_suite() -> Vec<RepetitionCase> {
    let ws = |v: &[(usize, usize)]| -> Vec<usize> {
        v.iter().flat_map(|&(count, len)| std::iter::repeat(len).take(count)).collect()
    };
    let reject_lens = ws(&[(6, 17), (43, 16)]);
    let accept_lens = ws(&[(1, 18), (46, 17)]);
    let pairs: Vec<(String, String, Option<usize>)> = vec![
        (repeated_lines(31), repeated_lines(30), Some(0)),
        (repeated_paragraphs(31), repeated_paragraphs(30), Some(1)),
        (
            repeated_line_chars(21, 10, &reject_lens, "\n"),
            repeated_line_chars(20, 10, &accept_lens, "\n"),
            Some(2),
        ),
        (
            repeated_line_chars(21, 10, &reject_lens, "\n\n"),
            repeated_line_chars(20, 10, &accept_lens, "\n\n"),
            Some(2),
        ),
        (repeated_gram(2, 100, 500), repeated_gram(2, 100, 501), Some(4)),
        (repeated_gram(3, 37, 202), repeated_gram(3, 18, 102), Some(5)),
        (repeated_gram(4, 33, 203), repeated_gram(4, 16, 103), Some(6)),
        (repeated_segments(5, 4, 57), repeated_segments(5, 4, 58), Some(7)),
        (repeated_segments(19, 1, 204), repeated_segments(19, 1, 209), Some(8)),
        (repeated_segments(19, 1, 205), repeated_segments(19, 1, 210), Some(9)),
        (repeated_segments(19, 1, 206), repeated_segments(19, 1, 211), Some(10)),
        (repeated_segments(19, 1, 207), repeated_segments(19, 1, 212), Some(11)),
        (repeated_segments(19, 1, 208), repeated_segments(19, 1, 209), Some(12)),
    ];
    let mut out = Vec::new();
    for (rule, (above, at, first)) in pairs.into_iter().enumerate() {
        out.push(RepetitionCase {
            name: format!("rule{}_above", rule + 1),
            rule,
            text: above,
            expected: first,
        });
        out.push(RepetitionCase {
            name: format!("rule{}_at_or_below", rule + 1),
            rule,
            text: at,
            expected: None,
        });
    }
    out
}
