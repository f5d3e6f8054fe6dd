//! Fixture helpers shared by the integration tests.
#![allow(dead_code)]

pub mod boundary;

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use corpusforge::langid::{self, FeatureSelectionCriteria, LabeledDoc, LangIdModel, TrainerConfig};
use corpusforge::warc::write::response_member;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub struct FixturePage {
    pub file: String,
    pub url: String,
    pub timestamp: DateTime<Utc>,
    pub content_type: String,
    pub body: Vec<u8>,
}

/// The twelve pages of the end-to-end fixture, in manifest order.
pub fn e2e_pages() -> Vec<FixturePage> {
    let dir = fixtures().join("e2e");
    let manifest = std::fs::read_to_string(dir.join("manifest.tsv")).unwrap();
    manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            FixturePage {
                file: f[0].to_string(),
                url: f[1].to_string(),
                timestamp: DateTime::parse_from_rfc3339(f[2]).unwrap().with_timezone(&Utc),
                content_type: f[3].to_string(),
                body: std::fs::read(dir.join("pages").join(f[0])).unwrap(),
            }
        })
        .collect()
}

/// Packs pages into a WARC, one gzip member per response record, in the
/// order given by `order` (indices into `pages`).
pub fn warc_bytes(pages: &[FixturePage], order: &[usize]) -> Vec<u8> {
    let mut out = Vec::new();
    for &i in order {
        let p = &pages[i];
        out.extend(response_member(&p.url, p.timestamp, &p.content_type, &p.body));
    }
    out
}

pub fn e2e_warc() -> Vec<u8> {
    let pages = e2e_pages();
    let order: Vec<usize> = (0..pages.len()).collect();
    warc_bytes(&pages, &order)
}

pub fn langid_corpus() -> Vec<LabeledDoc> {
    langid::load_corpus_dir(fixtures().join("langid")).unwrap()
}

pub const HOLDOUT: f64 = 0.2;
pub const SPLIT_SEED: u64 = 17;

/// Model trained on the whole language-ID fixture corpus.
pub fn fixture_model() -> LangIdModel {
    static MODEL: OnceLock<LangIdModel> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            langid::train_from_corpus(
                &langid_corpus(),
                &FeatureSelectionCriteria::default(),
                &TrainerConfig::default(),
            )
            .unwrap()
        })
        .clone()
}
