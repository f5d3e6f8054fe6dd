//! Stage orchestration.
//!
//! A run ingests archives, gates and extracts pages, identifies their
//! language, filters by repetition and quality, removes near-duplicates,
//! filters by host and finally cleans the text. Every stage can also run on
//! its own over a corpus file; chaining single-stage runs produces the same
//! bytes as one full run.
//!
//! Results never depend on the worker count: per-document work runs on a
//! thread pool but outputs are collected in input order, and deduplication
//! emits survivors in a canonical order.

mod config;
mod corpus;
mod stats;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::clean::{clean_text, FooterTrimmer};
use crate::decision::FilterDecision;
use crate::dedup::{self, DedupDoc, MinHasher, SignatureCache};
use crate::extract::{extract_main_text_with, ExtractOptions};
use crate::hostfilter::{self, BlockList, HostStats, Ut1Lists};
use crate::langid::{rapid_japanese_check, LangIdModel, JAPANESE};
use crate::lists::{ExpressionList, PhraseMatcher};
use crate::quality::{self, quality_check_with_ng};
use crate::repetition::{self, repetition_check};
use crate::warc::{PageRecord, ReaderOptions, WarcCounters, WarcError, WarcReader};

pub use config::{ListPaths, PipelineConfig};
pub use corpus::{
    format_timestamp, read_corpus, read_corpus_file, to_line, write_corpus, write_corpus_file, CorpusError,
    Document,
};
pub use stats::{StageStats, StatsReport};

pub const STAGE_INGEST: &str = "ingest";
pub const STAGE_RAPID_GATE: &str = "rapid_gate";
pub const STAGE_EXTRACT: &str = "extract";
pub const STAGE_LANGUAGE: &str = "language";
pub const STAGE_REPETITION: &str = "repetition";
pub const STAGE_QUALITY: &str = "quality";
pub const STAGE_DEDUP: &str = "dedup";
pub const STAGE_HOSTFILTER: &str = "hostfilter";
pub const STAGE_CLEAN: &str = "clean";

pub const RULE_NON_RESPONSE: &str = "non_response";
pub const RULE_BAD_STATUS: &str = "bad_status";
pub const RULE_NON_HTML: &str = "non_html";
pub const RULE_MALFORMED: &str = "malformed";
pub const RULE_RAPID_GATE: &str = "not_japanese_markup";
pub const RULE_EXTRACTION_FAILED: &str = "extraction_failed";
pub const RULE_NOT_JAPANESE: &str = "not_japanese";
pub const RULE_EXACT_DUPLICATE: &str = "exact_duplicate";
pub const RULE_NEAR_DUPLICATE: &str = "near_duplicate";
pub const RULE_BLOCKED_HOST: &str = "blocked_host";

/// Output file names inside the output directory.
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const TIMINGS_FILE: &str = "timings.tsv";
pub const BLOCKLIST_FILE: &str = "blocklist.txt";
/// Present while a run is in progress or after it ended incomplete.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown stage `{0}` (expected extract, filter-repetition, filter-quality, dedup, hostfilter or clean)")]
    UnknownStage(String),
    #[error("stage {stage} failed{}: {message}", .last_record.as_deref().map(|r| format!(" after record {r}")).unwrap_or_default())]
    Stage {
        stage: String,
        last_record: Option<String>,
        message: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl PipelineError {
    fn stage(stage: &str, last_record: Option<&str>, message: impl ToString) -> Self {
        PipelineError::Stage {
            stage: stage.to_string(),
            last_record: last_record.map(str::to_string),
            message: message.to_string(),
        }
    }

    /// Process exit status: 1 for usage problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::UnknownStage(_) => 1,
            _ => 2,
        }
    }
}

/// Stages runnable in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Ingest, rapid gate, extraction and language identification.
    Extract,
    Repetition,
    Quality,
    Dedup,
    HostFilter,
    Clean,
}

impl Stage {
    pub fn from_name(name: &str) -> Result<Self, PipelineError> {
        Ok(match name {
            "extract" => Stage::Extract,
            "filter-repetition" | "repetition" => Stage::Repetition,
            "filter-quality" | "quality" => Stage::Quality,
            "dedup" => Stage::Dedup,
            "hostfilter" => Stage::HostFilter,
            "clean" => Stage::Clean,
            other => return Err(PipelineError::UnknownStage(other.to_string())),
        })
    }

    /// Name accepted by [`Stage::from_name`].
    pub fn name(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Repetition => "filter-repetition",
            Stage::Quality => "filter-quality",
            Stage::Dedup => "dedup",
            Stage::HostFilter => "hostfilter",
            Stage::Clean => "clean",
        }
    }

    /// Stage order of a full run.
    pub fn sequence(config: &PipelineConfig) -> Vec<Stage> {
        let filters = if config.repetition_first {
            [Stage::Repetition, Stage::Quality]
        } else {
            [Stage::Quality, Stage::Repetition]
        };
        let mut out = vec![Stage::Extract];
        out.extend(filters);
        out.extend([Stage::Dedup, Stage::HostFilter, Stage::Clean]);
        out
    }
}

/// Models and lists shared by all stages.
#[derive(Clone)]
pub struct Resources {
    pub model: Option<Arc<LangIdModel>>,
    pub ng: PhraseMatcher,
    pub dating: PhraseMatcher,
    pub footer: FooterTrimmer,
    pub ut1: Ut1Lists,
}

impl Resources {
    /// Loads everything the configuration names. The model is optional
    /// here; the extract stage fails without one.
    pub fn load(config: &PipelineConfig) -> Result<Self, PipelineError> {
        let model = match &config.model {
            Some(path) => Some(Arc::new(LangIdModel::load(path).map_err(|e| {
                PipelineError::Config(format!("language model {}: {e}", path.display()))
            })?)),
            None => None,
        };
        let list = |path: &Option<PathBuf>, fallback: fn() -> ExpressionList, what: &str| {
            let list = match path {
                Some(p) => ExpressionList::load(p)
                    .map_err(|e| PipelineError::Config(format!("{what} list {}: {e}", p.display())))?,
                None => fallback(),
            };
            if list.is_placeholder() {
                log::warn!("using the bundled placeholder {what} list; supply a real one for production runs");
            }
            Ok::<_, PipelineError>(list)
        };
        let ng = list(&config.lists.ng, ExpressionList::placeholder_ng, "NG-expression")?;
        let dating = list(&config.lists.dating, ExpressionList::placeholder_dating, "dating-term")?;
        let markers = list(&config.lists.footer_markers, ExpressionList::default_footer_markers, "footer-marker")?;
        let ut1 = match &config.lists.ut1_dir {
            Some(dir) => Ut1Lists::load_dir(dir, &config.lists.ut1_categories)
                .map_err(|e| PipelineError::Config(e.to_string()))?,
            None => Ut1Lists::default(),
        };
        Ok(Self {
            model,
            ng: PhraseMatcher::nfkc(ng.expressions()),
            dating: PhraseMatcher::nfkc(dating.expressions()),
            footer: FooterTrimmer::new(markers.expressions()),
            ut1,
        })
    }

    /// Same as [`load`](Self::load) but with an in-memory model.
    pub fn with_model(config: &PipelineConfig, model: LangIdModel) -> Result<Self, PipelineError> {
        let mut r = Self::load(&PipelineConfig {
            model: None,
            ..config.clone()
        })?;
        r.model = Some(Arc::new(model));
        Ok(r)
    }
}

/// Documents surviving a step plus its accounting.
#[derive(Debug, Clone, Default)]
pub struct StageOutput {
    pub docs: Vec<Document>,
    pub report: StatsReport,
    /// Set by the host-filter stage.
    pub blocklist: Option<BlockList>,
}

fn thread_pool(config: &PipelineConfig) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))
}

fn text_chars(docs: &[Document]) -> u64 {
    docs.iter().map(Document::chars).sum()
}

/// Language verdict for one extracted document.
enum LanguageOutcome {
    NotJapanese,
    Kept(Document),
}

struct ExtractState {
    ingest: StageStats,
    gate: StageStats,
    extract: StageStats,
    language: StageStats,
    docs: Vec<Document>,
}

impl ExtractState {
    fn new() -> Self {
        let mut s = Self {
            ingest: StageStats::new(STAGE_INGEST),
            gate: StageStats::new(STAGE_RAPID_GATE),
            extract: StageStats::new(STAGE_EXTRACT),
            language: StageStats::new(STAGE_LANGUAGE),
            docs: Vec::new(),
        };
        for r in [RULE_NON_RESPONSE, RULE_BAD_STATUS, RULE_NON_HTML, RULE_MALFORMED] {
            s.ingest.declare_rule(r);
        }
        s.gate.declare_rule(RULE_RAPID_GATE);
        s.extract.declare_rule(RULE_EXTRACTION_FAILED);
        s.language.declare_rule(RULE_NOT_JAPANESE);
        s
    }

    /// Gate, extract and classify one batch of pages, each step as its own
    /// parallel pass so that each can be timed.
    fn process_batch(&mut self, pages: Vec<PageRecord>, config: &PipelineConfig, model: &LangIdModel) {
        let t = Instant::now();
        self.gate.input_docs += pages.len() as u64;
        let passed: Vec<bool> = if config.rapid_gate {
            pages.par_iter().map(|p| rapid_japanese_check(&p.html, model)).collect()
        } else {
            vec![true; pages.len()]
        };
        let pages: Vec<PageRecord> = pages
            .into_iter()
            .zip(passed)
            .filter_map(|(p, ok)| {
                if !ok {
                    self.gate.reject(RULE_RAPID_GATE);
                }
                ok.then_some(p)
            })
            .collect();
        self.gate.output_docs += pages.len() as u64;
        self.gate.wall_seconds += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let options = ExtractOptions {
            drop_comment_sections: config.drop_comment_sections,
        };
        self.extract.input_docs += pages.len() as u64;
        let extracted: Vec<Option<Document>> = pages
            .into_par_iter()
            .map(|p| {
                let e = extract_main_text_with(&p.html, &p.url, &options);
                (!e.extraction_failed).then(|| Document {
                    url: p.url,
                    host: p.host,
                    timestamp: p.timestamp,
                    text: e.text,
                    meta: BTreeMap::new(),
                })
            })
            .collect();
        let docs: Vec<Document> = extracted
            .into_iter()
            .filter_map(|d| {
                if d.is_none() {
                    self.extract.reject(RULE_EXTRACTION_FAILED);
                }
                d
            })
            .collect();
        self.extract.output_docs += docs.len() as u64;
        self.extract.output_chars += text_chars(&docs);
        self.extract.wall_seconds += t.elapsed().as_secs_f64();

        let t = Instant::now();
        self.language.input_docs += docs.len() as u64;
        self.language.input_chars += text_chars(&docs);
        let outcomes: Vec<LanguageOutcome> = docs
            .into_par_iter()
            .map(|mut d| {
                let (label, score) = model.classify_with_min_score(&d.text, config.min_lang_score);
                if label != JAPANESE {
                    return LanguageOutcome::NotJapanese;
                }
                d.annotate("lang", label);
                d.annotate("lang_score", score);
                LanguageOutcome::Kept(d)
            })
            .collect();
        for o in outcomes {
            match o {
                LanguageOutcome::Kept(d) => {
                    self.language.output_docs += 1;
                    self.language.output_chars += d.chars();
                    self.docs.push(d);
                }
                LanguageOutcome::NotJapanese => self.language.reject(RULE_NOT_JAPANESE),
                            }
        }
        self.language.wall_seconds += t.elapsed().as_secs_f64();
    }

    fn add_counters(&mut self, c: &WarcCounters) {
        let s = &mut self.ingest;
        s.input_docs += c.total;
        s.output_docs += c.yielded;
        for (rule, n) in [
            (RULE_NON_RESPONSE, c.non_response),
            (RULE_BAD_STATUS, c.bad_status),
            (RULE_NON_HTML, c.non_html),
            (RULE_MALFORMED, c.malformed),
        ] {
            *s.rejections.entry(rule.to_string()).or_default() += n;
        }
    }

    fn finish(self) -> StageOutput {
        let mut report = StatsReport::new();
        report.stages = vec![self.ingest, self.gate, self.extract, self.language];
        StageOutput {
            docs: self.docs,
            report,
            blocklist: None,
        }
    }
}

/// Steps 1–4 over a set of WARC archives, in the given order.
///
/// A truncated archive contributes the records before the damage and marks
/// the report incomplete; an archive that cannot be opened aborts.
pub fn extract_archives(
    paths: &[PathBuf],
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let mut sources = Vec::with_capacity(paths.len());
    for p in paths {
        let f = fs::File::open(p)
            .map_err(|e| PipelineError::stage(STAGE_INGEST, None, format!("{}: {e}", p.display())))?;
        sources.push((p.display().to_string(), BufReader::new(f)));
    }
    extract_readers(sources, config, resources)
}

/// Steps 1–4 over already opened archive streams, each labelled by name.
pub fn extract_readers<R: io::BufRead>(
    sources: impl IntoIterator<Item = (String, R)>,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let model = resources
        .model
        .clone()
        .ok_or_else(|| PipelineError::Config("the extract stage needs a language model".into()))?;
    let pool = thread_pool(config)?;
    let options = ReaderOptions {
        accept_non_2xx: config.accept_non_2xx,
    };
    let mut state = ExtractState::new();
    let mut errors = Vec::new();
    for (name, reader) in sources {
        let mut records = WarcReader::with_options(reader, options);
        let mut batch = Vec::with_capacity(config.batch_size);
        loop {
            let t = Instant::now();
            let next = records.next();
            state.ingest.wall_seconds += t.elapsed().as_secs_f64();
            match next {
                Some(Ok(page)) => {
                    batch.push(page);
                    if batch.len() == config.batch_size {
                        pool.install(|| state.process_batch(std::mem::take(&mut batch), config, &model));
                    }
                }
                Some(Err(e @ WarcError::PartialArchive { .. })) => {
                    log::error!("{name}: {e}");
                    errors.push(format!("{name}: {e}"));
                }
                Some(Err(WarcError::Io(e))) => {
                    return Err(PipelineError::stage(
                        STAGE_INGEST,
                        batch.last().map(|p: &PageRecord| p.url.as_str()),
                        format!("{name}: {e}"),
                    ));
                }
                None => break,
            }
        }
        if !batch.is_empty() {
            pool.install(|| state.process_batch(batch, config, &model));
        }
        state.add_counters(&records.counters());
    }
    let mut out = state.finish();
    if !errors.is_empty() {
        out.report.complete = false;
        out.report.errors = errors;
    }
    Ok(out)
}

/// Applies a per-document verdict, keeping accepted documents in order.
fn filter_stage(
    name: &str,
    rules: &[&str],
    docs: Vec<Document>,
    pool: &rayon::ThreadPool,
    check: impl Fn(&str) -> FilterDecision + Sync,
) -> StageOutput {
    let t = Instant::now();
    let mut stats = StageStats::new(name);
    for r in rules {
        stats.declare_rule(r);
    }
    stats.input_docs = docs.len() as u64;
    stats.input_chars = text_chars(&docs);
    let decisions: Vec<FilterDecision> = pool.install(|| docs.par_iter().map(|d| check(&d.text)).collect());
    let mut kept = Vec::with_capacity(docs.len());
    for (d, decision) in docs.into_iter().zip(decisions) {
        if decision.accepted {
            kept.push(d);
        } else {
            stats.reject(&decision.rule_id);
        }
    }
    stats.output_docs = kept.len() as u64;
    stats.output_chars = text_chars(&kept);
    stats.wall_seconds = t.elapsed().as_secs_f64();
    single(kept, stats)
}

fn single(docs: Vec<Document>, stats: StageStats) -> StageOutput {
    let mut report = StatsReport::new();
    report.stages.push(stats);
    StageOutput {
        docs,
        report,
        blocklist: None,
    }
}

pub fn repetition_stage(docs: Vec<Document>, config: &PipelineConfig) -> Result<StageOutput, PipelineError> {
    let pool = thread_pool(config)?;
    let t = &config.repetition;
    Ok(filter_stage(STAGE_REPETITION, &repetition::RULE_IDS, docs, &pool, |text| {
        repetition_check(text, t)
    }))
}

pub fn quality_stage(
    docs: Vec<Document>,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let pool = thread_pool(config)?;
    let t = &config.quality;
    Ok(filter_stage(STAGE_QUALITY, &quality::RULE_IDS, docs, &pool, |text| {
        quality_check_with_ng(text, t, &resources.ng)
    }))
}

/// Canonical document order used after deduplication.
fn canonical_cmp(a: &(Document, String), b: &(Document, String)) -> std::cmp::Ordering {
    a.0.url
        .cmp(&b.0.url)
        .then_with(|| a.0.timestamp.cmp(&b.0.timestamp))
        .then_with(|| a.1.cmp(&b.1))
}

/// Collapses byte-identical records, then keeps the newest member of every
/// near-duplicate cluster. Survivors come out in (url, timestamp, id) order,
/// so the result is independent of input order.
pub fn dedup_stage(docs: Vec<Document>, config: &PipelineConfig) -> Result<StageOutput, PipelineError> {
    let t = Instant::now();
    let pool = thread_pool(config)?;
    let dcfg = config.dedup_config();
    let mut stats = StageStats::new(STAGE_DEDUP);
    stats.declare_rule(RULE_EXACT_DUPLICATE);
    stats.declare_rule(RULE_NEAR_DUPLICATE);
    stats.input_docs = docs.len() as u64;
    stats.input_chars = text_chars(&docs);

    let mut with_ids: Vec<(Document, String)> = pool.install(|| {
        docs.into_par_iter()
            .map(|d| {
                let id = d.id();
                (d, id)
            })
            .collect()
    });
    with_ids.sort_by(canonical_cmp);
    let mut seen = HashSet::new();
    let mut unique = Vec::with_capacity(with_ids.len());
    for (d, id) in with_ids {
        // Same url, time and text (annotations may differ): one record.
        if seen.insert(id.clone()) {
            unique.push((d, id));
        } else {
            stats.reject(RULE_EXACT_DUPLICATE);
        }
    }

    let hasher = MinHasher::new(dcfg.clone()).map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut cache = match &config.dedup_cache {
        Some(path) => Some(
            SignatureCache::load_or_empty(path, &dcfg)
                .map_err(|e| PipelineError::stage(STAGE_DEDUP, None, e))?,
        ),
        None => None,
    };
    let signatures: Vec<dedup::MinHashSignature> = pool.install(|| {
        unique
            .par_iter()
            .map(|(d, id)| match cache.as_ref().and_then(|c| c.get(id, &d.text)) {
                Some(sig) => sig.clone(),
                None => hasher.signature_of_text(&d.text),
            })
            .collect()
    });
    if let (Some(c), Some(path)) = (cache.as_mut(), &config.dedup_cache) {
        for ((d, id), sig) in unique.iter().zip(&signatures) {
            if c.get(id, &d.text).is_none() {
                c.insert(id, &d.text, sig.clone());
            }
        }
        c.save(path).map_err(|e| PipelineError::stage(STAGE_DEDUP, None, e))?;
    }
    let dd: Vec<DedupDoc<'_>> = unique
        .iter()
        .map(|(d, id)| DedupDoc {
            id,
            text: &d.text,
            timestamp: d.timestamp,
            url: &d.url,
        })
        .collect();
    let outcome = pool
        .install(|| dedup::deduplicate_signatures(&dd, &signatures, &dcfg))
        .map_err(|e| PipelineError::stage(STAGE_DEDUP, None, e))?;
    for (month, m) in dedup::stats_by_month(&dd, &outcome) {
        stats.note(&format!("input_{month}"), m.input);
        stats.note(&format!("kept_{month}"), m.kept);
    }
    drop(dd);
    let mut kept = Vec::with_capacity(outcome.survivors.len());
    for (d, id) in unique {
        if outcome.survivors.contains(&id) {
            kept.push(d);
        } else {
            stats.reject(RULE_NEAR_DUPLICATE);
        }
    }
    stats.output_docs = kept.len() as u64;
    stats.output_chars = text_chars(&kept);
    stats.wall_seconds = t.elapsed().as_secs_f64();
    Ok(single(kept, stats))
}

/// Two passes over the input: host statistics, then filtering with the
/// block list built from them.
pub fn hostfilter_stage(
    docs: Vec<Document>,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let t = Instant::now();
    let pool = thread_pool(config)?;
    let mut stats = StageStats::new(STAGE_HOSTFILTER);
    stats.declare_rule(RULE_BLOCKED_HOST);
    stats.input_docs = docs.len() as u64;
    stats.input_chars = text_chars(&docs);
    let host_stats: BTreeMap<String, HostStats> = pool.install(|| {
        docs.par_chunks(256)
            .map(|chunk| {
                hostfilter::accumulate_host_stats(
                    chunk.iter().map(|d| (d.host.as_str(), d.text.as_str())),
                    &resources.dating,
                    &resources.ng,
                )
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (host, s) in b {
                    a.entry(host).or_default().merge(&s);
                }
                a
            })
    });
    let blocklist = hostfilter::build_blocklist(&host_stats, &resources.ut1, &config.host)
        .map_err(|e| PipelineError::stage(STAGE_HOSTFILTER, None, e))?;
    stats.note("hosts", host_stats.len() as u64);
    stats.note("blocklist_patterns", blocklist.len() as u64);
    let blocked: Vec<bool> = pool.install(|| docs.par_iter().map(|d| blocklist.is_blocked(&d.host)).collect());
    let mut kept = Vec::with_capacity(docs.len());
    for (d, b) in docs.into_iter().zip(blocked) {
        if b {
            stats.reject(RULE_BLOCKED_HOST);
        } else {
            kept.push(d);
        }
    }
    stats.output_docs = kept.len() as u64;
    stats.output_chars = text_chars(&kept);
    stats.wall_seconds = t.elapsed().as_secs_f64();
    let mut out = single(kept, stats);
    out.blocklist = Some(blocklist);
    Ok(out)
}

/// Punctuation normalisation and footer trimming; never drops documents.
pub fn clean_stage(
    docs: Vec<Document>,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let t = Instant::now();
    let pool = thread_pool(config)?;
    let mut stats = StageStats::new(STAGE_CLEAN);
    stats.input_docs = docs.len() as u64;
    stats.input_chars = text_chars(&docs);
    let cleaned: Vec<(Document, crate::clean::CleanReport)> = pool.install(|| {
        docs.into_par_iter()
            .map(|mut d| {
                let (text, report) = clean_text(&d.text, &resources.footer);
                d.text = text;
                if report.footer_lines_removed > 0 {
                    d.annotate("footer_lines_removed", report.footer_lines_removed as u64);
                }
                (d, report)
            })
            .collect()
    });
    stats.note("comma_normalized", 0);
    stats.note("period_normalized", 0);
    stats.note("footer_lines_removed", 0);
    let mut kept = Vec::with_capacity(cleaned.len());
    for (d, r) in cleaned {
        stats.note("comma_normalized", r.comma_normalized as u64);
        stats.note("period_normalized", r.period_normalized as u64);
        stats.note("footer_lines_removed", r.footer_lines_removed as u64);
        kept.push(d);
    }
    stats.output_docs = kept.len() as u64;
    stats.output_chars = text_chars(&kept);
    stats.wall_seconds = t.elapsed().as_secs_f64();
    Ok(single(kept, stats))
}

/// Runs one document-level stage.
pub fn apply_stage(
    stage: Stage,
    docs: Vec<Document>,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    match stage {
        Stage::Extract => Err(PipelineError::Config("the extract stage reads archives, not documents".into())),
        Stage::Repetition => repetition_stage(docs, config),
        Stage::Quality => quality_stage(docs, config, resources),
        Stage::Dedup => dedup_stage(docs, config),
        Stage::HostFilter => hostfilter_stage(docs, config, resources),
        Stage::Clean => clean_stage(docs, config, resources),
    }
}

/// All stages over `config.inputs`, in memory.
pub fn run_in_memory(config: &PipelineConfig, resources: &Resources) -> Result<StageOutput, PipelineError> {
    config.validate()?;
    let mut out = extract_archives(&config.inputs, config, resources)?;
    for stage in Stage::sequence(config).into_iter().skip(1) {
        let next = apply_stage(stage, std::mem::take(&mut out.docs), config, resources)?;
        out.docs = next.docs;
        out.report.extend(next.report);
        if next.blocklist.is_some() {
            out.blocklist = next.blocklist;
        }
    }
    Ok(out)
}

/// Writes the corpus, stats, timings and (when present) block list.
pub fn write_outputs(out_dir: &Path, output: &StageOutput) -> Result<(), PipelineError> {
    fs::create_dir_all(out_dir)?;
    write_corpus_file(out_dir.join(CORPUS_FILE), &output.docs)?;
    fs::write(out_dir.join(STATS_FILE), output.report.to_json())?;
    fs::write(out_dir.join(TIMINGS_FILE), output.report.timings())?;
    if let Some(list) = &output.blocklist {
        fs::write(out_dir.join(BLOCKLIST_FILE), list.to_text())?;
    }
    let marker = out_dir.join(INCOMPLETE_MARKER);
    if output.report.complete {
        if marker.exists() {
            fs::remove_file(marker)?;
        }
    } else {
        fs::write(marker, output.report.errors.join("\n") + "\n")?;
    }
    Ok(())
}

/// Full run: every stage, outputs written to `config.out_dir`.
///
/// The output directory is marked incomplete for the duration of the run
/// and stays marked when the run fails or an archive was truncated.
pub fn run_pipeline(config: &PipelineConfig, resources: &Resources) -> Result<StageOutput, PipelineError> {
    fs::create_dir_all(&config.out_dir)?;
    let marker = config.out_dir.join(INCOMPLETE_MARKER);
    fs::write(&marker, "run in progress\n")?;
    let out = match run_in_memory(config, resources) {
        Ok(out) => out,
        Err(e) => {
            fs::write(&marker, format!("{e}\n"))?;
            return Err(e);
        }
    };
    write_outputs(&config.out_dir, &out)?;
    Ok(out)
}

/// One stage over files: archives for `extract`, otherwise corpus files
/// (concatenated in the given order). Writes the resulting corpus to
/// `output` and returns the stage's output.
pub fn run_stage(
    stage_name: &str,
    inputs: &[PathBuf],
    output: &Path,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<StageOutput, PipelineError> {
    let stage = Stage::from_name(stage_name)?;
    config.validate()?;
    let out = match stage {
        Stage::Extract => extract_archives(inputs, config, resources)?,
        _ => {
            let mut docs = Vec::new();
            for p in inputs {
                docs.extend(read_corpus_file(p)?);
            }
            apply_stage(stage, docs, config, resources)?
        }
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_corpus_file(output, &out.docs)?;
    Ok(out)
}

/// Document, character, host and month totals of a corpus.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct CorpusSummary {
    pub documents: u64,
    pub chars: u64,
    pub hosts: u64,
    pub documents_by_month: BTreeMap<String, u64>,
}

pub fn summarize(docs: &[Document]) -> CorpusSummary {
    let hosts: HashSet<&str> = docs.iter().map(|d| d.host.as_str()).collect();
    let mut by_month = BTreeMap::new();
    for d in docs {
        *by_month.entry(d.timestamp.format("%Y-%m").to_string()).or_default() += 1;
    }
    CorpusSummary {
        documents: docs.len() as u64,
        chars: text_chars(docs),
        hosts: hosts.len() as u64,
        documents_by_month: by_month,
    }
}
