//! Main-content text extraction from raw HTML bytes.
//!
//! A single-pass tag-soup scanner: no tree is built. Script-like elements
//! and boilerplate containers are skipped wholesale, block-level elements
//! start new lines, inline elements do not, and character references are
//! decoded. The output has no whitespace-only lines and never more than one
//! blank line in a row.

use std::borrow::Cow;

use encoding_rs::{Encoding, UTF_8};

/// Elements whose raw content is never text.
const RAW_TEXT: [&str; 6] = ["script", "style", "noscript", "template", "textarea", "xmp"];

/// Containers dropped together with their subtree.
const BOILERPLATE: [&str; 7] = ["nav", "header", "footer", "aside", "form", "head", "select"];

const BLOCK: [&str; 40] = [
    "address", "article", "blockquote", "body", "caption", "center", "dd", "details", "dialog",
    "dir", "div", "dl", "dt", "fieldset", "figcaption", "figure", "h1", "h2", "h3", "h4", "h5",
    "h6", "hgroup", "html", "legend", "li", "main", "menu", "ol", "option", "p", "pre", "section",
    "summary", "table", "tbody", "tfoot", "thead", "tr", "ul",
];

const VOID: [&str; 14] = [
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr",
];

/// How many leading bytes are searched for a `<meta charset>` declaration.
const CHARSET_SNIFF_BYTES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtractedText {
    pub text: String,
    pub line_count: usize,
    pub source_url: String,
    /// Set when the input does not look like text at all.
    pub extraction_failed: bool,
}

/// Extraction knobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Drop elements whose `id` or `class` marks them as a comments section
    /// (a token starting with `comment`).
    pub drop_comment_sections: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            drop_comment_sections: true,
        }
    }
}

/// Finds the encoding declared by a BOM or a `<meta>` tag near the top.
pub fn sniff_encoding(html: &[u8]) -> &'static Encoding {
    if let Some((enc, _)) = Encoding::for_bom(html) {
        return enc;
    }
    let head = &html[..html.len().min(CHARSET_SNIFF_BYTES)];
    let lower = head.to_ascii_lowercase();
    let mut from = 0;
    while let Some(pos) = find(&lower[from..], b"<meta") {
        let start = from + pos;
        let end = lower[start..]
            .iter()
            .position(|&b| b == b'>')
            .map_or(lower.len(), |p| start + p);
        let tag = &lower[start..end];
        if let Some(label) = charset_in(tag) {
            if let Some(enc) = Encoding::for_label_no_replacement(label) {
                // A page cannot declare itself UTF-16 through ASCII markup.
                if enc == encoding_rs::UTF_16LE || enc == encoding_rs::UTF_16BE {
                    return UTF_8;
                }
                return enc;
            }
        }
        from = end.max(start + 1);
    }
    UTF_8
}

fn charset_in(tag: &[u8]) -> Option<&[u8]> {
    let pos = find(tag, b"charset")?;
    let mut rest = &tag[pos + 7..];
    rest = trim_ascii_start(rest);
    rest = rest.strip_prefix(b"=")?;
    rest = trim_ascii_start(rest);
    rest = rest
        .strip_prefix(b"\"")
        .or_else(|| rest.strip_prefix(b"'"))
        .unwrap_or(rest);
    let len = rest
        .iter()
        .position(|&b| matches!(b, b'"' | b'\'' | b';' | b' ' | b'/' | b'>') || b.is_ascii_whitespace())
        .unwrap_or(rest.len());
    (len > 0).then(|| &rest[..len])
}

fn trim_ascii_start(mut b: &[u8]) -> &[u8] {
    while let [first, rest @ ..] = b {
        if first.is_ascii_whitespace() {
            b = rest;
        } else {
            break;
        }
    }
    b
}

pub(crate) fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

/// Decodes markup bytes using the sniffed encoding; malformed sequences
/// become U+FFFD.
pub fn decode_html(html: &[u8]) -> Cow<'_, str> {
    let enc = sniff_encoding(html);
    let (text, _, _) = enc.decode(html);
    text
}

/// Binary payloads decode to text dominated by control characters or
/// replacement characters.
fn looks_binary(text: &str) -> bool {
    let sample: Vec<char> = text.chars().take(2048).collect();
    if sample.is_empty() {
        return false;
    }
    let bad = sample
        .iter()
        .filter(|&&c| c == '\u{FFFD}' || (c.is_control() && !c.is_whitespace()))
        .count();
    bad * 10 > sample.len() * 3
}

#[derive(Debug)]
enum Token<'a> {
    Text(&'a str),
    Start {
        name: String,
        attrs: &'a str,
        self_closing: bool,
    },
    End(String),
}

/// Yields text runs and tags; comments, doctypes and processing
/// instructions are consumed silently. Raw-text element bodies are skipped by
/// the caller through [`Tokenizer::skip_raw_text`].
struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn skip_raw_text(&mut self, name: &str) {
        let rest = &self.src.as_bytes()[self.pos..];
        let close = format!("</{name}");
        let lower_rest = rest.to_ascii_lowercase();
        match find(&lower_rest, close.as_bytes()) {
            Some(p) => {
                let after = self.pos + p;
                let end = self.src.as_bytes()[after..]
                    .iter()
                    .position(|&b| b == b'>')
                    .map_or(self.src.len(), |q| after + q + 1);
                self.pos = end;
            }
            None => self.pos = self.src.len(),
        }
    }
}

fn is_tag_name_start(b: u8) -> bool {
    b.is_ascii_alphabetic()
}

impl<'a> Iterator for Tokenizer<'a> {
    type Item = Token<'a>;

    fn next(&mut self) -> Option<Token<'a>> {
        let bytes = self.src.as_bytes();
        loop {
            if self.pos >= bytes.len() {
                return None;
            }
            if bytes[self.pos] != b'<' {
                let start = self.pos;
                let mut end = start;
                while end < bytes.len() {
                    if bytes[end] == b'<' {
                        let next = bytes.get(end + 1).copied().unwrap_or(0);
                        if is_tag_name_start(next) || matches!(next, b'/' | b'!' | b'?') {
                            break;
                        }
                    }
                    end += 1;
                }
                self.pos = end;
                return Some(Token::Text(&self.src[start..end]));
            }
            let rest = &bytes[self.pos..];
            if rest.starts_with(b"<!--") {
                self.pos = match find(&rest[4..], b"-->") {
                    Some(p) => self.pos + 4 + p + 3,
                    None => bytes.len(),
                };
                continue;
            }
            if rest.starts_with(b"<!") || rest.starts_with(b"<?") {
                self.pos = rest
                    .iter()
                    .position(|&b| b == b'>')
                    .map_or(bytes.len(), |p| self.pos + p + 1);
                continue;
            }
            let closing = rest.get(1) == Some(&b'/');
            let name_start = self.pos + if closing { 2 } else { 1 };
            let mut name_end = name_start;
            while name_end < bytes.len()
                && !bytes[name_end].is_ascii_whitespace()
                && !matches!(bytes[name_end], b'>' | b'/')
            {
                name_end += 1;
            }
            let tag_end = find_tag_end(bytes, name_end);
            let name = self.src[name_start..name_end].to_ascii_lowercase();
            let inner_end = tag_end.saturating_sub(1).max(name_end);
            let attrs = &self.src[name_end..inner_end.min(bytes.len())];
            self.pos = tag_end;
            if name.is_empty() {
                continue;
            }
            if closing {
                return Some(Token::End(name));
            }
            let self_closing = attrs.trim_end().ends_with('/');
            return Some(Token::Start {
                name,
                attrs,
                self_closing,
            });
        }
    }
}

/// Position just past the `>` that closes a tag, honouring quoted attribute
/// values.
fn find_tag_end(bytes: &[u8], from: usize) -> usize {
    let mut quote: Option<u8> = None;
    let mut i = from;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => return i + 1,
            None => {}
        }
        i += 1;
    }
    bytes.len()
}

/// Value of attribute `name` in a raw attribute string.
pub(crate) fn attribute<'a>(attrs: &'a str, name: &str) -> Option<&'a str> {
    let bytes = attrs.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        let key_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'=' | b'/') {
            i += 1;
        }
        let key = &attrs[key_start..i];
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = "";
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let q = bytes[i];
                let start = i + 1;
                let end = bytes[start..].iter().position(|&b| b == q).map_or(bytes.len(), |p| start + p);
                value = &attrs[start..end];
                i = (end + 1).min(bytes.len());
            } else {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                value = &attrs[start..i];
            }
        }
        if key.is_empty() {
            i += 1;
            continue;
        }
        if key.eq_ignore_ascii_case(name) {
            return Some(value);
        }
    }
    None
}

fn marks_comment_section(attrs: &str) -> bool {
    ["id", "class"].iter().any(|a| {
        attribute(attrs, a).is_some_and(|v| {
            v.split_ascii_whitespace()
                .any(|t| t.to_ascii_lowercase().starts_with("comment"))
        })
    })
}

/// Accumulates lines of text.
#[derive(Default)]
struct LineBuilder {
    lines: Vec<String>,
    current: String,
    pending_space: bool,
    /// Consecutive explicit breaks (`<br>`) without text in between.
    breaks: usize,
}

impl LineBuilder {
    fn push_text(&mut self, text: &str, preformatted: bool) {
        if preformatted {
            for (i, part) in text.split('\n').enumerate() {
                if i > 0 {
                    self.end_line();
                }
                self.push_inline(part);
            }
        } else {
            self.push_inline(text);
        }
    }

    fn push_inline(&mut self, text: &str) {
        for c in text.chars() {
            if c.is_whitespace() {
                self.pending_space = true;
            } else {
                if self.pending_space && !self.current.is_empty() {
                    self.current.push(' ');
                }
                self.pending_space = false;
                self.current.push(c);
                self.breaks = 0;
            }
        }
    }

    fn space(&mut self) {
        self.pending_space = true;
    }

    fn end_line(&mut self) {
        if !self.current.is_empty() {
            self.lines.push(std::mem::take(&mut self.current));
        }
        self.pending_space = false;
    }

    fn line_break(&mut self) {
        if self.current.is_empty() {
            self.breaks += 1;
            // A second consecutive <br> on an empty line is a paragraph gap.
            if self.breaks == 2 && self.lines.last().is_some_and(|l| !l.is_empty()) {
                self.lines.push(String::new());
            }
        } else {
            self.breaks = 1;
            self.end_line();
        }
    }

    fn block_boundary(&mut self) {
        self.end_line();
        self.breaks = 0;
    }

    fn finish(mut self) -> Vec<String> {
        self.end_line();
        while self.lines.last().is_some_and(|l| l.is_empty()) {
            self.lines.pop();
        }
        self.lines
    }
}

/// Extracts main-content text from raw HTML bytes.
pub fn extract_main_text(html: &[u8], url: &str) -> ExtractedText {
    extract_main_text_with(html, url, &ExtractOptions::default())
}

pub fn extract_main_text_with(html: &[u8], url: &str, options: &ExtractOptions) -> ExtractedText {
    let decoded = decode_html(html);
    if looks_binary(&decoded) {
        return ExtractedText {
            source_url: url.to_string(),
            extraction_failed: true,
            ..Default::default()
        };
    }
    let mut out = LineBuilder::default();
    let mut skip: Vec<String> = Vec::new();
    let mut pre_depth = 0usize;
    let mut tokens = Tokenizer::new(&decoded);
    while let Some(token) = tokens.next() {
        match token {
            Token::Text(t) => {
                if skip.is_empty() {
                    let decoded_text = html_escape::decode_html_entities(t);
                    out.push_text(&decoded_text, pre_depth > 0);
                }
            }
            Token::Start { name, attrs, self_closing } => {
                let name = name.as_str();
                if RAW_TEXT.contains(&name) {
                    if !self_closing {
                        tokens.skip_raw_text(name);
                    }
                    continue;
                }
                if name == "body" {
                    // Tag soup: an unclosed <head> must not swallow the body.
                    skip.retain(|s| s != "head");
                }
                if VOID.contains(&name) || self_closing {
                    if skip.is_empty() {
                        match name {
                            "br" => out.line_break(),
                            "hr" => out.block_boundary(),
                            _ => {}
                        }
                    }
                    continue;
                }
                let drop = BOILERPLATE.contains(&name)
                    || (options.drop_comment_sections && marks_comment_section(attrs));
                if drop || !skip.is_empty() {
                    skip.push(name.to_string());
                    continue;
                }
                if name == "pre" {
                    pre_depth += 1;
                }
                if matches!(name, "td" | "th") {
                    out.space();
                } else if BLOCK.contains(&name) {
                    out.block_boundary();
                }
            }
            Token::End(name) => {
                if let Some(p) = skip.iter().rposition(|s| *s == name) {
                    skip.truncate(p);
                    continue;
                }
                if !skip.is_empty() {
                    if matches!(name.as_str(), "body" | "html") {
                        skip.clear();
                    }
                    continue;
                }
                if name == "pre" {
                    pre_depth = pre_depth.saturating_sub(1);
                }
                if name == "br" {
                    out.line_break();
                } else if matches!(name.as_str(), "td" | "th") {
                    out.space();
                } else if BLOCK.contains(&name.as_str()) {
                    out.block_boundary();
                }
            }
        }
    }
    let lines = out.finish();
    let line_count = lines.len();
    ExtractedText {
        text: lines.join("\n"),
        line_count,
        source_url: url.to_string(),
        extraction_failed: false,
    }
}

/// Raw attribute string of the first start tag named `name`.
pub(crate) fn first_start_tag<'a>(decoded: &'a str, name: &str) -> Option<&'a str> {
    let mut tokens = Tokenizer::new(decoded);
    while let Some(token) = tokens.next() {
        if let Token::Start { name: n, attrs, self_closing } = token {
            if n == name {
                return Some(attrs);
            }
            if !self_closing && RAW_TEXT.contains(&n.as_str()) {
                tokens.skip_raw_text(&n);
            }
        }
    }
    None
}

/// Text of the first `<title>` element within `html`, entity-decoded and
/// whitespace-collapsed.
pub(crate) fn title_text(decoded: &str) -> Option<String> {
    let mut tokens = Tokenizer::new(decoded);
    while let Some(token) = tokens.next() {
        match token {
            Token::Start { name, .. } if name == "title" => {
                let start = tokens.pos;
                let lower = decoded.as_bytes()[start..].to_ascii_lowercase();
                let end = find(&lower, b"</title").map_or(decoded.len(), |p| start + p);
                let raw = html_escape::decode_html_entities(&decoded[start..end]);
                let collapsed: Vec<&str> = raw.split_whitespace().collect();
                return Some(collapsed.join(" "));
            }
            Token::Start { name, self_closing: false, .. } if RAW_TEXT.contains(&name.as_str()) => {
                tokens.skip_raw_text(&name);
            }
            _ => {}
        }
    }
    None
}
