//! Japanese web-corpus construction from WARC archives.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`warc`]: streaming reader for gzip-compressed WARC files and Common
//!   Crawl snapshot listings.
//! - [`langid`]: the rapid markup-level Japanese gate and the character
//!   n-gram linear language identifier (feature selection, training,
//!   classification, model files).
//! - [`extract`]: main-content text extraction from raw HTML bytes.
//! - [`quality`]: the seven Japanese text-quality rules and the NG-expression
//!   ratio filter.
//! - [`repetition`]: the thirteen repetition-removal rules.
//! - [`dedup`]: MinHash signatures, banded LSH and newest-wins clustering.
//! - [`hostfilter`]: hostname statistics, block-list construction and matching.
//! - [`clean`]: punctuation normalisation and footer trimming.
//! - [`pipeline`]: stage orchestration, the line-delimited corpus format and
//!   per-stage statistics.

pub mod clean;
pub mod decision;
pub mod dedup;
pub mod extract;
pub mod hostfilter;
pub mod langid;
pub mod lists;
pub mod pipeline;
pub mod quality;
pub mod repetition;
pub mod text;
pub mod warc;

pub use decision::FilterDecision;
pub use dedup::{DedupConfig, MinHashSignature};
pub use extract::{extract_main_text, ExtractedText};
pub use langid::{classify_text, rapid_japanese_check, LangIdModel};
pub use pipeline::{Document, PipelineConfig, StageStats};
pub use quality::{quality_check, CharClass, QualityThresholds};
pub use repetition::{repetition_check, repetition_metrics, RepetitionThresholds};
pub use warc::{PageRecord, SnapshotRef};
