//! Line-delimited JSON corpus files: one [`Document`] object per line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use xxhash_rust::xxh3::xxh3_64;

/// Extracted text plus provenance, as it flows between stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub url: String,
    pub host: String,
    #[serde(serialize_with = "ser_ts", deserialize_with = "de_ts")]
    pub timestamp: DateTime<Utc>,
    pub text: String,
    /// Per-stage annotations, keyed by annotation name.
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

fn ser_ts<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_timestamp(ts))
}

fn de_ts<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
    let raw = String::deserialize(d)?;
    DateTime::parse_from_rfc3339(&raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(serde::de::Error::custom)
}

/// RFC 3339 in UTC with a `Z` suffix and only as many fractional digits as
/// needed.
pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

impl Document {
    /// Stable identifier: `url@timestamp#xxh3(text)`.
    pub fn id(&self) -> String {
        format!("{}@{}#{:016x}", self.url, format_timestamp(&self.timestamp), xxh3_64(self.text.as_bytes()))
    }

    /// Unicode scalar count of the text.
    pub fn chars(&self) -> u64 {
        self.text.chars().count() as u64
    }

    pub fn annotate(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.meta.insert(key.to_string(), value.into());
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn to_line(doc: &Document) -> String {
    serde_json::to_string(doc).expect("documents always serialize")
}

pub fn write_corpus(w: &mut impl Write, docs: &[Document]) -> io::Result<()> {
    for d in docs {
        w.write_all(to_line(d).as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_corpus_file(path: impl AsRef<Path>, docs: &[Document]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_corpus(&mut w, docs)?;
    w.flush()
}

/// Reads documents; blank lines are ignored. `name` labels errors.
pub fn read_corpus(r: impl BufRead, name: &str) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn read_corpus_file(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let r = io::BufReader::new(fs::File::open(path)?);
    read_corpus(r, &path.display().to_string())
}
