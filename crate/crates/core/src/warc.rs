//! Streaming reader for gzip-compressed WARC archives and Common Crawl
//! snapshot listings.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Read};
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use flate2::bufread::{GzDecoder, MultiGzDecoder};
use thiserror::Error;
use url::Url;

/// Endpoint serving Common Crawl listings and archives.
pub const DEFAULT_CC_BASE: &str = "https://data.commoncrawl.org";
/// Overrides [`DEFAULT_CC_BASE`].
pub const CC_BASE_ENV: &str = "CORPUSFORGE_CC_BASE";

/// One archived HTTP response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub url: String,
    pub host: String,
    pub timestamp: DateTime<Utc>,
    /// Response body with HTTP headers stripped, undecoded.
    pub html: Vec<u8>,
    /// MIME type from the HTTP `Content-Type` header without parameters;
    /// empty when absent.
    pub content_type: String,
}

#[derive(Debug, Error)]
pub enum WarcError {
    #[error("partial archive: gzip member {member} is truncated or corrupt after {complete} complete records: {source}")]
    PartialArchive {
        member: u64,
        complete: u64,
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Record accounting for one archive; `yielded + skipped() + malformed ==
/// total` at every point between records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WarcCounters {
    pub total: u64,
    pub yielded: u64,
    /// `request`, `metadata`, `warcinfo` and other non-response records.
    pub non_response: u64,
    /// Responses with a status outside 200–299.
    pub bad_status: u64,
    /// Responses whose body is not HTML.
    pub non_html: u64,
    pub malformed: u64,
}

impl WarcCounters {
    /// Well-formed records that did not yield a page.
    pub fn skipped(&self) -> u64 {
        self.non_response + self.bad_status + self.non_html
    }

    pub fn merge(&mut self, other: &WarcCounters) {
        self.total += other.total;
        self.yielded += other.yielded;
        self.non_response += other.non_response;
        self.bad_status += other.bad_status;
        self.non_html += other.non_html;
        self.malformed += other.malformed;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReaderOptions {
    /// Yield responses whose HTTP status is outside 200–299.
    pub accept_non_2xx: bool,
}

/// Iterates the HTML responses of a WARC stream made of gzip members.
pub struct WarcReader<R> {
    inner: R,
    options: ReaderOptions,
    counters: WarcCounters,
    members: u64,
    /// Decompressed records of the current member not yet returned.
    pending: std::vec::IntoIter<PageRecord>,
    done: bool,
}

/// Reads every HTML response in `archive`.
pub fn iter_records<R: BufRead>(archive: R) -> WarcReader<R> {
    WarcReader::new(archive)
}

impl<R: BufRead> WarcReader<R> {
    pub fn new(inner: R) -> Self {
        Self::with_options(inner, ReaderOptions::default())
    }

    pub fn with_options(inner: R, options: ReaderOptions) -> Self {
        Self {
            inner,
            options,
            counters: WarcCounters::default(),
            members: 0,
            pending: Vec::new().into_iter(),
            done: false,
        }
    }

    pub fn counters(&self) -> WarcCounters {
        self.counters
    }

    fn next_member(&mut self) -> Result<Option<Vec<u8>>, WarcError> {
        if self.inner.fill_buf()?.is_empty() {
            return Ok(None);
        }
        self.members += 1;
        let mut buf = Vec::new();
        let mut decoder = GzDecoder::new(&mut self.inner);
        match decoder.read_to_end(&mut buf) {
            Ok(_) => Ok(Some(buf)),
            Err(source) => Err(WarcError::PartialArchive {
                member: self.members,
                complete: self.counters.total,
                source,
            }),
        }
    }
}

impl<R: BufRead> Iterator for WarcReader<R> {
    type Item = Result<PageRecord, WarcError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(record) = self.pending.next() {
                return Some(Ok(record));
            }
            if self.done {
                return None;
            }
            match self.next_member() {
                Ok(Some(member)) => {
                    let records = parse_member(&member, &self.options, &mut self.counters);
                    self.pending = records.into_iter();
                }
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

enum Parsed {
    Page(PageRecord),
    NonResponse,
    BadStatus,
    NonHtml,
    Malformed,
}

/// Parses every record in one decompressed member. A member normally holds a
/// single record; a malformed header makes the rest of the member unusable
/// because record boundaries are lost.
fn parse_member(data: &[u8], options: &ReaderOptions, counters: &mut WarcCounters) -> Vec<PageRecord> {
    let mut out = Vec::new();
    let mut rest = data;
    loop {
        rest = skip_blank_lines(rest);
        if rest.is_empty() {
            break;
        }
        counters.total += 1;
        match parse_record(rest, options) {
            Some((parsed, consumed)) => {
                rest = &rest[consumed..];
                match parsed {
                    Parsed::Page(p) => {
                        counters.yielded += 1;
                        out.push(p);
                    }
                    Parsed::NonResponse => counters.non_response += 1,
                    Parsed::BadStatus => counters.bad_status += 1,
                    Parsed::NonHtml => counters.non_html += 1,
                    Parsed::Malformed => counters.malformed += 1,
                }
            }
            None => {
                counters.malformed += 1;
                break;
            }
        }
    }
    out
}

fn skip_blank_lines(mut b: &[u8]) -> &[u8] {
    while let Some(rest) = b.strip_prefix(b"\r\n").or_else(|| b.strip_prefix(b"\n")) {
        b = rest;
    }
    b
}

/// Splits a header block off `data`: returns the header lines and the offset
/// of the first body byte.
fn split_headers(data: &[u8]) -> Option<(Vec<&str>, usize)> {
    let mut lines = Vec::new();
    let mut pos = 0;
    loop {
        let nl = data[pos..].iter().position(|&b| b == b'\n')?;
        let mut line = &data[pos..pos + nl];
        pos += nl + 1;
        if let Some(l) = line.strip_suffix(b"\r") {
            line = l;
        }
        if line.is_empty() {
            return Some((lines, pos));
        }
        lines.push(std::str::from_utf8(line).ok()?);
    }
}

fn header<'a>(lines: &[&'a str], name: &str) -> Option<&'a str> {
    lines.iter().find_map(|l| {
        let (k, v) = l.split_once(':')?;
        k.trim().eq_ignore_ascii_case(name).then(|| v.trim())
    })
}

/// Returns the parse outcome and the number of bytes consumed, or `None`
/// when the record header itself is unreadable.
fn parse_record(data: &[u8], options: &ReaderOptions) -> Option<(Parsed, usize)> {
    let (lines, body_start) = split_headers(data)?;
    let version = lines.first()?;
    if !version.starts_with("WARC/1.") {
        return None;
    }
    let length: usize = header(&lines, "Content-Length")?.parse().ok()?;
    let body_end = body_start.checked_add(length)?;
    if body_end > data.len() {
        return None;
    }
    let block = &data[body_start..body_end];
    let consumed = body_end;
    let warc_type = header(&lines, "WARC-Type").unwrap_or("");
    if !warc_type.eq_ignore_ascii_case("response") {
        return Some((Parsed::NonResponse, consumed));
    }
    Some((response_record(&lines, block, options), consumed))
}

fn response_record(lines: &[&str], block: &[u8], options: &ReaderOptions) -> Parsed {
    let Some(uri) = header(lines, "WARC-Target-URI") else {
        return Parsed::Malformed;
    };
    let uri = uri.trim_start_matches('<').trim_end_matches('>');
    let Ok(url) = Url::parse(uri) else {
        return Parsed::Malformed;
    };
    let host = match url.host_str() {
        Some(h) if !h.is_empty() => h.to_ascii_lowercase(),
        _ => return Parsed::Malformed,
    };
    let Some(timestamp) = header(lines, "WARC-Date")
        .and_then(|d| DateTime::parse_from_rfc3339(d).ok())
        .map(|d| d.with_timezone(&Utc))
    else {
        return Parsed::Malformed;
    };
    let Some((http_lines, payload_start)) = split_headers(block) else {
        return Parsed::Malformed;
    };
    let Some(status) = http_lines.first().and_then(|l| http_status(l)) else {
        return Parsed::Malformed;
    };
    if !(200..300).contains(&status) && !options.accept_non_2xx {
        return Parsed::BadStatus;
    }
    let content_type = header(&http_lines[1..], "Content-Type")
        .map(|ct| ct.split(';').next().unwrap_or("").trim().to_ascii_lowercase())
        .unwrap_or_default();
    let body = &block[payload_start..];
    if !is_html(&content_type, body) {
        return Parsed::NonHtml;
    }
    Parsed::Page(PageRecord {
        url: url.to_string(),
        host,
        timestamp,
        html: body.to_vec(),
        content_type,
    })
}

fn http_status(line: &str) -> Option<u16> {
    let mut parts = line.split_ascii_whitespace();
    if !parts.next()?.starts_with("HTTP/") {
        return None;
    }
    parts.next()?.parse().ok()
}

/// HTML by declared type, or by a leading markup marker when the declared
/// type is absent or generic.
pub fn is_html(content_type: &str, body: &[u8]) -> bool {
    if matches!(content_type, "text/html" | "application/xhtml+xml") {
        return true;
    }
    let start = body.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(body.len());
    let head = body[start..body.len().min(start + 16)].to_ascii_lowercase();
    [b"<!doctype html".as_slice(), b"<html", b"<?xml", b"<head"]
        .iter()
        .any(|m| head.starts_with(m))
}

/// A crawl snapshot and the archive paths it publishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotRef {
    pub snapshot_id: String,
    pub warc_paths: Vec<String>,
}

impl SnapshotRef {
    /// Archive month as `YYYY-WW` (year and crawl week).
    pub fn crawl_week(&self) -> &str {
        &self.snapshot_id["CC-MAIN-".len()..]
    }
}

/// `CC-MAIN-YYYY-WW`.
pub fn is_valid_snapshot_id(id: &str) -> bool {
    let Some(rest) = id.strip_prefix("CC-MAIN-") else {
        return false;
    };
    let b = rest.as_bytes();
    b.len() == 7 && b[4] == b'-' && b[..4].iter().chain(&b[5..]).all(u8::is_ascii_digit)
}

#[derive(Debug, Error)]
pub enum ListingError {
    #[error("invalid snapshot id {0:?} (expected CC-MAIN-YYYY-WW)")]
    InvalidSnapshotId(String),
    #[error("fetching listing for {snapshot_id} failed: {message}")]
    Fetch {
        snapshot_id: String,
        message: String,
    },
}

impl ListingError {
    /// Fetch failures may succeed on retry; malformed ids never do.
    pub fn is_retriable(&self) -> bool {
        matches!(self, ListingError::Fetch { .. })
    }
}

/// Relative path of a snapshot's gzip-compressed listing.
pub fn listing_path(snapshot_id: &str) -> String {
    format!("crawl-data/{snapshot_id}/warc.paths.gz")
}

/// Absolute listing URL under `base`.
pub fn listing_url(base: &str, snapshot_id: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), listing_path(snapshot_id))
}

/// The remote base endpoint, honouring [`CC_BASE_ENV`].
pub fn cc_base_from_env() -> String {
    std::env::var(CC_BASE_ENV)
        .ok()
        .filter(|v| !v.trim().is_empty())
        .unwrap_or_else(|| DEFAULT_CC_BASE.to_string())
}

/// Where listing bytes come from.
pub trait ListingSource {
    /// Returns the gzip-compressed listing for `snapshot_id`.
    fn fetch_listing(&self, snapshot_id: &str) -> Result<Vec<u8>, ListingError>;
}

/// Listings mirrored on disk as `<root>/crawl-data/<id>/warc.paths.gz`.
#[derive(Debug, Clone)]
pub struct LocalListing {
    pub root: PathBuf,
}

impl LocalListing {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl ListingSource for LocalListing {
    fn fetch_listing(&self, snapshot_id: &str) -> Result<Vec<u8>, ListingError> {
        let path = self.root.join(listing_path(snapshot_id));
        std::fs::read(&path).map_err(|e| ListingError::Fetch {
            snapshot_id: snapshot_id.to_string(),
            message: format!("{}: {e}", path.display()),
        })
    }
}

/// Lists the archive paths of a snapshot, first occurrence of each kept.
pub fn list_snapshot_paths(snapshot_id: &str, source: &dyn ListingSource) -> Result<SnapshotRef, ListingError> {
    if !is_valid_snapshot_id(snapshot_id) {
        return Err(ListingError::InvalidSnapshotId(snapshot_id.to_string()));
    }
    let gz = source.fetch_listing(snapshot_id)?;
    let mut text = String::new();
    MultiGzDecoder::new(gz.as_slice())
        .read_to_string(&mut text)
        .map_err(|e| ListingError::Fetch {
            snapshot_id: snapshot_id.to_string(),
            message: format!("listing is not valid gzip text: {e}"),
        })?;
    let mut seen = HashSet::new();
    let warc_paths = text
        .lines()
        .map(|l| l.trim().trim_start_matches('/'))
        .filter(|l| !l.is_empty() && seen.insert(l.to_string()))
        .map(str::to_string)
        .collect();
    Ok(SnapshotRef {
        snapshot_id: snapshot_id.to_string(),
        warc_paths,
    })
}

impl fmt::Display for SnapshotRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} archives)", self.snapshot_id, self.warc_paths.len())
    }
}

/// Serialises WARC records, one gzip member each. Used for fixtures and
/// for re-packing filtered archives.
pub mod write {
    use std::io::{self, Write};

    use chrono::{DateTime, SecondsFormat, Utc};
    use flate2::write::GzEncoder;
    use flate2::Compression;

    /// A raw WARC record.
    pub struct RawRecord<'a> {
        pub warc_type: &'a str,
        pub target_uri: Option<&'a str>,
        pub date: DateTime<Utc>,
        pub content_type: &'a str,
        pub block: &'a [u8],
    }

    pub fn record_bytes(r: &RawRecord<'_>) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"WARC/1.0\r\n");
        out.extend_from_slice(format!("WARC-Type: {}\r\n", r.warc_type).as_bytes());
        if let Some(uri) = r.target_uri {
            out.extend_from_slice(format!("WARC-Target-URI: {uri}\r\n").as_bytes());
        }
        let date = r.date.to_rfc3339_opts(SecondsFormat::Secs, true);
        out.extend_from_slice(format!("WARC-Date: {date}\r\n").as_bytes());
        out.extend_from_slice(format!("Content-Type: {}\r\n", r.content_type).as_bytes());
        out.extend_from_slice(format!("Content-Length: {}\r\n\r\n", r.block.len()).as_bytes());
        out.extend_from_slice(r.block);
        out.extend_from_slice(b"\r\n\r\n");
        out
    }

    /// HTTP response block with the given status, content type and body.
    pub fn http_response(status: u16, content_type: &str, body: &[u8]) -> Vec<u8> {
        let mut out = format!(
            "HTTP/1.1 {status} X\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\r\n",
            body.len()
        )
        .into_bytes();
        out.extend_from_slice(body);
        out
    }

    /// Writes one gzip member per record.
    pub fn gzip_member(w: &mut impl Write, record: &[u8]) -> io::Result<()> {
        let mut enc = GzEncoder::new(Vec::new(), Compression::fast());
        enc.write_all(record)?;
        w.write_all(&enc.finish()?)
    }

    /// A complete response record for `url` as one gzip member.
    pub fn response_member(url: &str, date: DateTime<Utc>, content_type: &str, body: &[u8]) -> Vec<u8> {
        let block = http_response(200, content_type, body);
        let rec = record_bytes(&RawRecord {
            warc_type: "response",
            target_uri: Some(url),
            date,
            content_type: "application/http; msgtype=response",
            block: &block,
        });
        let mut out = Vec::new();
        gzip_member(&mut out, &rec).expect("writing to a Vec cannot fail");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::write::*;
    use super::*;
    use chrono::TimeZone;

    fn ts(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn member(r: &RawRecord<'_>) -> Vec<u8> {
        let mut out = Vec::new();
        gzip_member(&mut out, &record_bytes(r)).unwrap();
        out
    }

    fn simple(warc_type: &str, uri: Option<&str>, block: &[u8]) -> Vec<u8> {
        member(&RawRecord {
            warc_type,
            target_uri: uri,
            date: ts("2023-05-28T01:00:00Z"),
            content_type: "application/http",
            block,
        })
    }

    fn read_all(bytes: &[u8]) -> (Vec<PageRecord>, WarcCounters, Option<WarcError>) {
        let mut reader = iter_records(bytes);
        let mut pages = Vec::new();
        let mut err = None;
        for r in reader.by_ref() {
            match r {
                Ok(p) => pages.push(p),
                Err(e) => err = Some(e),
            }
        }
        (pages, reader.counters(), err)
    }

    fn mixed_archive() -> Vec<u8> {
        let mut a = simple("warcinfo", None, b"software: test\r\n");
        a.extend(simple("request", Some("https://example.jp/a"), b"GET /a HTTP/1.1\r\n\r\n"));
        a.extend(response_member("https://example.jp/a", ts("2023-05-28T01:00:00Z"), "text/html; charset=utf-8", b"<html>a</html>"));
        a.extend(simple("request", Some("https://Example.JP:8080/b?q=1"), b"GET /b HTTP/1.1\r\n\r\n"));
        a.extend(response_member("https://Example.JP:8080/b?q=1", ts("2023-06-01T12:30:00Z"), "text/html", b"<html>b</html>"));
        a
    }

    #[test]
    fn empty_stream() {
        let (pages, counters, err) = read_all(b"");
        assert!(pages.is_empty() && err.is_none());
        assert_eq!(counters, WarcCounters::default());
    }

    #[test]
    fn yields_responses_in_order() {
        let (pages, counters, err) = read_all(&mixed_archive());
        assert!(err.is_none());
        assert_eq!(pages.len(), 2);
        assert_eq!(pages[0].url, "https://example.jp/a");
        assert_eq!(pages[0].host, "example.jp");
        assert_eq!(pages[0].timestamp, Utc.with_ymd_and_hms(2023, 5, 28, 1, 0, 0).unwrap());
        assert_eq!(pages[0].html, b"<html>a</html>");
        assert_eq!(pages[0].content_type, "text/html");
        assert_eq!(pages[1].host, "example.jp");
        assert_eq!(counters.non_response, 3);
        assert_eq!((counters.total, counters.yielded, counters.skipped(), counters.malformed), (5, 2, 3, 0));
    }

    #[test]
    fn rereading_is_deterministic() {
        let a = mixed_archive();
        assert_eq!(read_all(&a).0, read_all(&a).0);
    }

    #[test]
    fn skips_non_html_and_errors() {
        let d = ts("2023-01-01T00:00:00Z");
        let mut a = response_member("https://x.jp/img", d, "image/png", b"\x89PNG\r\n");
        a.extend(response_member("https://x.jp/sniffed", d, "", b"  <!DOCTYPE html><p>x</p>"));
        let block = http_response(404, "text/html", b"<html>missing</html>");
        a.extend(simple("response", Some("https://x.jp/404"), &block));
        let (pages, counters, _) = read_all(&a);
        assert_eq!(pages.len(), 1);
        assert_eq!(pages[0].url, "https://x.jp/sniffed");
        assert_eq!((counters.non_html, counters.bad_status), (1, 1));

        let mut reader = WarcReader::with_options(a.as_slice(), ReaderOptions { accept_non_2xx: true });
        assert_eq!(reader.by_ref().filter_map(Result::ok).count(), 2);
    }

    #[test]
    fn malformed_records_are_counted_not_fatal() {
        let d = ts("2023-01-01T00:00:00Z");
        let mut a = Vec::new();
        gzip_member(&mut a, b"NOT A WARC HEADER\r\n\r\n").unwrap();
        a.extend(simple("response", Some("not a url"), &http_response(200, "text/html", b"<p>x</p>")));
        gzip_member(&mut a, b"WARC/1.0\r\nWARC-Type: response\r\nContent-Length: 99999\r\n\r\nshort").unwrap();
        a.extend(response_member("https://ok.jp/", d, "text/html", b"<p>ok</p>"));
        let (pages, counters, err) = read_all(&a);
        assert!(err.is_none());
        assert_eq!(pages.len(), 1);
        assert_eq!((counters.total, counters.yielded, counters.skipped(), counters.malformed), (4, 1, 0, 3));
    }

    #[test]
    fn truncated_member_is_partial_archive() {
        let d = ts("2023-01-01T00:00:00Z");
        let mut a = response_member("https://a.jp/", d, "text/html", b"<p>a</p>");
        let second = response_member("https://b.jp/", d, "text/html", b"<p>b</p>");
        a.extend_from_slice(&second[..second.len() - 10]);
        let (pages, counters, err) = read_all(&a);
        assert_eq!(pages.len(), 1);
        assert_eq!(counters.yielded, 1);
        assert!(matches!(err, Some(WarcError::PartialArchive { member: 2, complete: 1, .. })));
    }

    #[test]
    fn snapshot_ids() {
        assert!(is_valid_snapshot_id("CC-MAIN-2023-23"));
        assert!(!is_valid_snapshot_id("CC-MAIN-2023-2"));
        assert!(!is_valid_snapshot_id("CC-MAIN-20a3-23"));
        assert!(!is_valid_snapshot_id("cc-main-2023-23"));
        let url = listing_url("https://data.commoncrawl.org/", "CC-MAIN-2023-23");
        assert_eq!(url, "https://data.commoncrawl.org/crawl-data/CC-MAIN-2023-23/warc.paths.gz");
    }

    struct Fixed(Vec<u8>);
    impl ListingSource for Fixed {
        fn fetch_listing(&self, _: &str) -> Result<Vec<u8>, ListingError> {
            Ok(self.0.clone())
        }
    }

    fn gz(text: &str) -> Vec<u8> {
        let mut out = Vec::new();
        gzip_member(&mut out, text.as_bytes()).unwrap();
        out
    }

    #[test]
    fn listings() {
        let three = Fixed(gz("crawl-data/a.warc.gz\ncrawl-data/b.warc.gz\ncrawl-data/c.warc.gz\n"));
        let snap = list_snapshot_paths("CC-MAIN-2023-23", &three).unwrap();
        assert_eq!(snap.warc_paths.len(), 3);
        assert_eq!(snap.crawl_week(), "2023-23");

        let dup = Fixed(gz("x.warc.gz\n\nx.warc.gz\n"));
        assert_eq!(list_snapshot_paths("CC-MAIN-2020-40", &dup).unwrap().warc_paths, vec!["x.warc.gz"]);

        let err = list_snapshot_paths("CC-MAIN-2023", &three).unwrap_err();
        assert!(!err.is_retriable());
        let missing = LocalListing::new("/nonexistent");
        let err = list_snapshot_paths("CC-MAIN-2023-23", &missing).unwrap_err();
        assert!(err.is_retriable());
        assert!(err.to_string().contains("CC-MAIN-2023-23"));
    }
}
