//! Small text helpers shared by several stages.

use unicode_normalization::UnicodeNormalization;

/// NFKC-normalises `s`.
pub fn nfkc(s: &str) -> String {
    s.nfkc().collect()
}

#[inline]
pub fn is_line_separator(c: char) -> bool {
    c == '\n' || c == '\r'
}

/// Number of Unicode scalars in `s`, not counting line separators.
pub fn char_count_without_newlines(s: &str) -> usize {
    s.chars().filter(|&c| !is_line_separator(c)).count()
}

/// Exact Unicode scalar count.
#[inline]
pub fn char_count(s: &str) -> usize {
    s.chars().count()
}

/// Letters and digits in ASCII or their fullwidth forms.
pub fn is_alphanumeric_ascii_or_fullwidth(c: char) -> bool {
    c.is_ascii_alphanumeric()
        || matches!(c, '\u{FF10}'..='\u{FF19}' | '\u{FF21}'..='\u{FF3A}' | '\u{FF41}'..='\u{FF5A}')
}
