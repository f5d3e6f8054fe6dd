//! Character n-gram language identification.
//!
//! Texts are NFKC-normalised and lowercased, then represented as
//! L2-normalised counts of their character 1-, 2- and 3-grams restricted to a
//! selected vocabulary. One linear model per language is trained one-vs-rest
//! with an L2-regularised squared-hinge SVM solved by dual coordinate
//! descent; classification takes the arg-max score.
//!
//! The same model backs the rapid markup-level gate, which looks only at the
//! `<html lang>` attribute and the `<title>` text near the top of a page.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::extract;
use crate::text::nfkc;

/// Label returned for input with nothing to classify.
pub const UNDETERMINED: &str = "und";
pub const JAPANESE: &str = "ja";
pub const CHINESE: &str = "zh";
/// Longest n-gram used as a feature.
pub const MAX_NGRAM: usize = 3;
/// How much markup the rapid gate looks at.
pub const RAPID_SCAN_BYTES: usize = 16 * 1024;

const MODEL_VERSION: u8 = 1;
const MODEL_MAGIC: &[u8; 4] = b"LIDM";

#[derive(Debug, Error)]
pub enum LangIdError {
    #[error("empty input text")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("model format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Vocabulary cut-offs; the vocabulary is the union of all four top-K lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FeatureSelectionCriteria {
    pub top_all: usize,
    pub top_japanese: usize,
    pub top_chinese: usize,
    pub top_per_language: usize,
}

impl Default for FeatureSelectionCriteria {
    fn default() -> Self {
        Self {
            top_all: 400_000,
            top_japanese: 400_000,
            top_chinese: 100_000,
            top_per_language: 10_000,
        }
    }
}

impl FeatureSelectionCriteria {
    pub fn validate(&self) -> Result<(), LangIdError> {
        if self.top_all == 0 || self.top_japanese == 0 || self.top_chinese == 0 || self.top_per_language == 0 {
            return Err(LangIdError::Config("feature cut-offs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    /// Misclassification cost `C`.
    pub regularization_c: f64,
    pub max_epochs: usize,
    /// Stop when the projected-gradient spread falls below this.
    pub convergence_tol: f64,
    /// Seeds the per-label visiting order.
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            regularization_c: 10.0,
            max_epochs: 1000,
            convergence_tol: 0.1,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), LangIdError> {
        if !(self.regularization_c > 0.0 && self.regularization_c.is_finite()) {
            return Err(LangIdError::Config("regularization_c must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(LangIdError::Config("max_epochs must be positive".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(LangIdError::Config("convergence_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDoc {
    pub label: String,
    pub text: String,
}

impl LabeledDoc {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            text: text.into(),
        }
    }
}

/// Normalisation applied before n-gram extraction.
pub fn normalize(text: &str) -> String {
    nfkc(text).to_lowercase()
}

/// Calls `f` with every character n-gram (n = 1..=3) of an already
/// normalised string.
pub fn for_each_ngram<'a>(normalized: &'a str, mut f: impl FnMut(&'a str)) {
    let bounds: Vec<usize> = normalized
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(normalized.len()))
        .collect();
    let chars = bounds.len() - 1;
    for n in 1..=MAX_NGRAM {
        for start in 0..chars.saturating_sub(n - 1) {
            f(&normalized[bounds[start]..bounds[start + n]]);
        }
    }
}

/// Sparse vector as `(feature index, value)` pairs sorted by index.
pub type SparseVector = Vec<(u32, f64)>;

fn l2_normalize(counts: HashMap<u32, f64>) -> SparseVector {
    let mut v: SparseVector = counts.into_iter().collect();
    v.sort_unstable_by_key(|&(i, _)| i);
    let norm = v.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, x) in &mut v {
            *x /= norm;
        }
    }
    v
}

/// Selects the feature vocabulary from a labelled corpus.
///
/// Returned n-grams are sorted, so the vocabulary (and every index derived
/// from it) is independent of corpus order.
pub fn select_features(corpus: &[LabeledDoc], criteria: &FeatureSelectionCriteria) -> Result<Vec<String>, LangIdError> {
    criteria.validate()?;
    let mut per_label: BTreeMap<&str, HashMap<String, u64>> = BTreeMap::new();
    for doc in corpus {
        let counts = per_label.entry(doc.label.as_str()).or_default();
        let normalized = normalize(&doc.text);
        for_each_ngram(&normalized, |g| {
            if let Some(c) = counts.get_mut(g) {
                *c += 1;
            } else {
                counts.insert(g.to_string(), 1);
            }
        });
    }
    if per_label.len() < 2 {
        return Err(LangIdError::Corpus("at least two languages are required".into()));
    }
    if !per_label.contains_key(JAPANESE) {
        return Err(LangIdError::Corpus("corpus has no Japanese documents".into()));
    }
    let mut global: HashMap<&str, u64> = HashMap::new();
    for counts in per_label.values() {
        for (g, &c) in counts {
            *global.entry(g.as_str()).or_default() += c;
        }
    }
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    vocab.extend(top_k(global.iter().map(|(g, &c)| (*g, c)), criteria.top_all));
    for (label, counts) in &per_label {
        let entries = || counts.iter().map(|(g, &c)| (g.as_str(), c));
        vocab.extend(top_k(entries(), criteria.top_per_language));
        if *label == JAPANESE {
            vocab.extend(top_k(entries(), criteria.top_japanese));
        }
        if *label == CHINESE {
            vocab.extend(top_k(entries(), criteria.top_chinese));
        }
    }
    Ok(vocab.into_iter().collect())
}

/// The `k` most frequent n-grams, ties broken by lexicographic order.
fn top_k<'a>(entries: impl Iterator<Item = (&'a str, u64)>, k: usize) -> Vec<String> {
    let mut all: Vec<(&str, u64)> = entries.collect();
    let cmp = |a: &(&str, u64), b: &(&str, u64)| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0));
    if all.len() > k {
        all.select_nth_unstable_by(k - 1, cmp);
        all.truncate(k);
    }
    all.into_iter().map(|(g, _)| g.to_string()).collect()
}

/// A trained one-vs-rest linear language identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LangIdModel {
    features: Vec<String>,
    index: HashMap<String, u32>,
    labels: Vec<String>,
    /// One dense weight vector per label.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    converged: bool,
}

impl LangIdModel {
    /// Assembles a model from parts. Features must be distinct.
    pub fn from_parts(
        features: Vec<String>,
        labels: Vec<String>,
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        converged: bool,
    ) -> Result<Self, LangIdError> {
        if labels.is_empty() || weights.len() != labels.len() || bias.len() != labels.len() {
            return Err(LangIdError::Format("label, weight and bias counts differ".into()));
        }
        if weights.iter().any(|w| w.len() != features.len()) {
            return Err(LangIdError::Format("weight vector length differs from feature count".into()));
        }
        let index: HashMap<String, u32> = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
        if index.len() != features.len() {
            return Err(LangIdError::Format("duplicate feature".into()));
        }
        Ok(Self {
            features,
            index,
            labels,
            weights,
            bias,
            converged,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, ngram: &str) -> Option<u32> {
        self.index.get(ngram).copied()
    }

    pub fn weights(&self, label: usize) -> &[f64] {
        &self.weights[label]
    }

    pub fn bias(&self, label: usize) -> f64 {
        self.bias[label]
    }

    /// False when training hit `max_epochs` for some label before meeting
    /// the convergence tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// L2-normalised in-vocabulary n-gram counts of `text`.
    pub fn extract_features(&self, text: &str) -> Result<SparseVector, LangIdError> {
        if text.trim().is_empty() {
            return Err(LangIdError::EmptyInput);
        }
        Ok(vectorize(&self.index, text))
    }

    /// Per-label linear scores in label order.
    pub fn scores(&self, x: &[(u32, f64)]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    /// Arg-max label and its score; [`UNDETERMINED`] with score 0 for
    /// blank text.
    pub fn classify(&self, text: &str) -> (String, f64) {
        let Ok(x) = self.extract_features(text) else {
            return (UNDETERMINED.to_string(), 0.0);
        };
        let scores = self.scores(&x);
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        (self.labels[best].clone(), scores[best])
    }

    /// Like [`classify`](Self::classify), but answers [`UNDETERMINED`] when
    /// the winning score is below `min_score`.
    pub fn classify_with_min_score(&self, text: &str, min_score: Option<f64>) -> (String, f64) {
        let (label, score) = self.classify(text);
        match min_score {
            Some(min) if label != UNDETERMINED && score < min => (UNDETERMINED.to_string(), score),
            _ => (label, score),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&[MODEL_VERSION])?;
        w.write_all(MODEL_MAGIC)?;
        write_strings(w, &self.labels)?;
        write_strings(w, &self.features)?;
        w.write_all(&[u8::from(self.converged)])?;
        for (weights, bias) in self.weights.iter().zip(&self.bias) {
            w.write_all(&bias.to_le_bytes())?;
            for x in weights {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, LangIdError> {
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != MODEL_VERSION {
            return Err(LangIdError::Format(format!("unsupported model version {}", version[0])));
        }
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(LangIdError::Format("not a language model file".into()));
        }
        let labels = read_strings(r)?;
        let features = read_strings(r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let mut weights = Vec::with_capacity(labels.len());
        let mut bias = Vec::with_capacity(labels.len());
        for _ in &labels {
            bias.push(read_f64(r)?);
            let mut buf = vec![0u8; features.len() * 8];
            r.read_exact(&mut buf)?;
            weights.push(
                buf.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                    .collect(),
            );
        }
        Self::from_parts(features, labels, weights, bias, flag[0] != 0)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LangIdError> {
        let mut w = io::BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LangIdError> {
        let mut r = io::BufReader::new(fs::File::open(path)?);
        Self::read_from(&mut r)
    }

    /// Human-readable dump: a header, per-label biases, then one line per
    /// feature with its weight under every label.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# lidm v{MODEL_VERSION} labels={} features={} converged={}\n",
            self.labels.len(),
            self.features.len(),
            self.converged
        ));
        out.push_str(&format!("labels\t{}\n", self.labels.join("\t")));
        let biases: Vec<String> = self.bias.iter().map(|b| format!("{b:.6}")).collect();
        out.push_str(&format!("bias\t{}\n", biases.join("\t")));
        for (i, f) in self.features.iter().enumerate() {
            let ws: Vec<String> = self.weights.iter().map(|w| format!("{:.6}", w[i])).collect();
            out.push_str(&format!("{}\t{}\n", f.escape_debug(), ws.join("\t")));
        }
        out
    }
}

fn vectorize(index: &HashMap<String, u32>, text: &str) -> SparseVector {
    let normalized = normalize(text);
    let mut counts: HashMap<u32, f64> = HashMap::new();
    for_each_ngram(&normalized, |g| {
        if let Some(&i) = index.get(g) {
            *counts.entry(i).or_default() += 1.0;
        }
    });
    l2_normalize(counts)
}

fn dot(w: &[f64], x: &[(u32, f64)]) -> f64 {
    x.iter().map(|&(i, v)| w[i as usize] * v).sum()
}

fn write_strings(w: &mut impl Write, items: &[String]) -> io::Result<()> {
    w.write_all(&(items.len() as u32).to_le_bytes())?;
    for s in items {
        let len = u16::try_from(s.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "string too long"))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(s.as_bytes())?;
    }
    Ok(())
}

fn read_strings(r: &mut impl Read) -> Result<Vec<String>, LangIdError> {
    let mut n = [0u8; 4];
    r.read_exact(&mut n)?;
    let n = u32::from_le_bytes(n) as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let mut len = [0u8; 2];
        r.read_exact(&mut len)?;
        let mut buf = vec![0u8; u16::from_le_bytes(len) as usize];
        r.read_exact(&mut buf)?;
        out.push(String::from_utf8(buf).map_err(|_| LangIdError::Format("string is not UTF-8".into()))?);
    }
    Ok(out)
}

fn read_f64(r: &mut impl Read) -> Result<f64, LangIdError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Trains one binary model per label over `vocabulary`.
///
/// Labels are visited in sorted order; each label's solver owns its own
/// seeded RNG, so the result does not depend on how labels are scheduled
/// across threads.
pub fn train(corpus: &[LabeledDoc], vocabulary: &[String], config: &TrainerConfig) -> Result<LangIdModel, LangIdError> {
    config.validate()?;
    let labels: Vec<String> = corpus
        .iter()
        .map(|d| d.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.len() < 2 {
        return Err(LangIdError::Corpus("at least two labels are required".into()));
    }
    if corpus.iter().any(|d| d.text.trim().is_empty()) {
        return Err(LangIdError::Corpus("corpus contains an empty document".into()));
    }
    let index: HashMap<String, u32> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i as u32))
        .collect();
    let xs: Vec<SparseVector> = corpus.par_iter().map(|d| vectorize(&index, &d.text)).collect();
    let label_of: Vec<usize> = corpus
        .iter()
        .map(|d| labels.binary_search(&d.label).expect("label collected above"))
        .collect();
    let results: Vec<(Vec<f64>, f64, bool)> = (0..labels.len())
        .into_par_iter()
        .map(|l| {
            let ys: Vec<f64> = label_of.iter().map(|&k| if k == l { 1.0 } else { -1.0 }).collect();
            let seed = config.seed ^ (l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            solve_l2r_l2loss_dual(&xs, &ys, vocabulary.len(), config, seed)
        })
        .collect();
    let converged = results.iter().all(|r| r.2);
    if !converged {
        log::warn!("language-model training stopped at max_epochs={} before converging", config.max_epochs);
    }
    let (weights, bias): (Vec<_>, Vec<_>) = results.into_iter().map(|(w, b, _)| (w, b)).unzip();
    LangIdModel::from_parts(vocabulary.to_vec(), labels, weights, bias, converged)
}

/// Dual coordinate descent for
/// `min_w ½‖w‖² + C Σ max(0, 1 − yᵢ wᵀxᵢ)²`, with a constant bias feature
/// of 1 appended to every instance (the bias is regularised like any other
/// weight). Returns the weights, the bias and whether the tolerance was met.
fn solve_l2r_l2loss_dual(
    xs: &[SparseVector],
    ys: &[f64],
    dim: usize,
    config: &TrainerConfig,
    seed: u64,
) -> (Vec<f64>, f64, bool) {
    let n = xs.len();
    let diag = 0.5 / config.regularization_c;
    let qd: Vec<f64> = xs
        .iter()
        .map(|x| x.iter().map(|&(_, v)| v * v).sum::<f64>() + 1.0 + diag)
        .collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let x = &xs[i];
            let y = ys[i];
            let g = y * (dot(&w, x) + b) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).max(0.0);
                let d = (alpha[i] - old) * y;
                for &(j, v) in x {
                    w[j as usize] += d * v;
                }
                b += d;
            }
        }
        if pg_max - pg_min <= config.convergence_tol {
            return (w, b, true);
        }
    }
    (w, b, false)
}

/// Selects features and trains in one step.
pub fn train_from_corpus(
    corpus: &[LabeledDoc],
    criteria: &FeatureSelectionCriteria,
    config: &TrainerConfig,
) -> Result<LangIdModel, LangIdError> {
    let vocabulary = select_features(corpus, criteria)?;
    train(corpus, &vocabulary, config)
}

/// Arg-max label of `text` under `model`.
pub fn classify_text(text: &str, model: &LangIdModel) -> (String, f64) {
    model.classify(text)
}

/// Markup-level Japanese pre-screen.
///
/// True when the first `<html>` tag declares a `lang` whose primary subtag
/// is `ja`, or when the first `<title>` is classified as Japanese. Only the
/// first [`RAPID_SCAN_BYTES`] bytes are examined.
pub fn rapid_japanese_check(html: &[u8], model: &LangIdModel) -> bool {
    let window = &html[..html.len().min(RAPID_SCAN_BYTES)];
    let decoded = extract::decode_html(window);
    if let Some(attrs) = extract::first_start_tag(&decoded, "html") {
        if extract::attribute(attrs, "lang").is_some_and(is_japanese_tag) {
            return true;
        }
    }
    extract::title_text(&decoded).is_some_and(|t| model.classify(&t).0 == JAPANESE)
}

/// Whether a BCP 47 language tag has primary subtag `ja`.
pub fn is_japanese_tag(tag: &str) -> bool {
    tag.trim()
        .split(['-', '_'])
        .next()
        .is_some_and(|p| p.eq_ignore_ascii_case(JAPANESE))
}

/// Per-label precision, recall and F1.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LabelScores {
    pub label: String,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalReport {
    pub documents: usize,
    pub accuracy: f64,
    /// Unweighted mean F1 over the gold labels.
    pub macro_f1: f64,
    pub per_label: Vec<LabelScores>,
}

/// Scores predictions against gold labels.
pub fn score_predictions(gold: &[&str], predicted: &[&str]) -> EvalReport {
    assert_eq!(gold.len(), predicted.len(), "one prediction per gold label");
    let labels: BTreeSet<&str> = gold.iter().copied().collect();
    let mut per_label = Vec::new();
    for &l in &labels {
        let tp = gold.iter().zip(predicted).filter(|(g, p)| **g == l && **p == l).count();
        let support = gold.iter().filter(|g| **g == l).count();
        let predicted_l = predicted.iter().filter(|p| **p == l).count();
        let precision = if predicted_l == 0 { 0.0 } else { tp as f64 / predicted_l as f64 };
        let recall = tp as f64 / support as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_label.push(LabelScores {
            label: l.to_string(),
            support,
            precision,
            recall,
            f1,
        });
    }
    let correct = gold.iter().zip(predicted).filter(|(g, p)| g == p).count();
    let n = gold.len();
    EvalReport {
        documents: n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        macro_f1: if per_label.is_empty() {
            0.0
        } else {
            per_label.iter().map(|s| s.f1).sum::<f64>() / per_label.len() as f64
        },
        per_label,
    }
}

/// Classifies every document and scores the result.
pub fn evaluate(model: &LangIdModel, corpus: &[LabeledDoc]) -> EvalReport {
    let predicted: Vec<String> = corpus.par_iter().map(|d| model.classify(&d.text).0).collect();
    let gold: Vec<&str> = corpus.iter().map(|d| d.label.as_str()).collect();
    let predicted: Vec<&str> = predicted.iter().map(String::as_str).collect();
    score_predictions(&gold, &predicted)
}

/// Reads a corpus laid out as one directory per language code; every
/// non-blank line of every file inside is one document. Directories and
/// files are visited in name order.
pub fn load_corpus_dir(dir: impl AsRef<Path>) -> Result<Vec<LabeledDoc>, LangIdError> {
    let mut docs = Vec::new();
    for lang_dir in sorted_entries(dir.as_ref())? {
        if !lang_dir.is_dir() {
            continue;
        }
        let label = lang_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| LangIdError::Corpus(format!("bad directory name {}", lang_dir.display())))?
            .to_string();
        for file in sorted_entries(&lang_dir)? {
            if !file.is_file() {
                continue;
            }
            let text = fs::read_to_string(&file)?;
            docs.extend(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(|l| LabeledDoc::new(label.clone(), l)),
            );
        }
    }
    if docs.is_empty() {
        return Err(LangIdError::Corpus(format!("no documents under {}", dir.as_ref().display())));
    }
    Ok(docs)
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>, LangIdError> {
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    Ok(entries)
}

/// Splits a corpus into (train, held-out) with `holdout` of every label's
/// documents (rounded down, at least one when the label has two or more)
/// held out, chosen by a seeded shuffle.
pub fn split_holdout(corpus: &[LabeledDoc], holdout: f64, seed: u64) -> (Vec<LabeledDoc>, Vec<LabeledDoc>) {
    let mut by_label: BTreeMap<&str, Vec<&LabeledDoc>> = BTreeMap::new();
    for d in corpus {
        by_label.entry(&d.label).or_default().push(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for docs in by_label.values_mut() {
        docs.shuffle(&mut rng);
        let mut k = (docs.len() as f64 * holdout).floor() as usize;
        if k == 0 && docs.len() >= 2 && holdout > 0.0 {
            k = 1;
        }
        test.extend(docs[..k].iter().map(|d| (*d).clone()));
        train.extend(docs[k..].iter().map(|d| (*d).clone()));
    }
    (train, test)
}

/// Agreement of the rapid gate with the precise classifier, taking the
/// precise verdict as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GateAgreement {
    pub precision: f64,
    pub recall: f64,
}

pub fn gate_agreement(rapid: &[bool], precise: &[bool]) -> GateAgreement {
    let tp = rapid.iter().zip(precise).filter(|(r, p)| **r && **p).count() as f64;
    let fp = rapid.iter().zip(precise).filter(|(r, p)| **r && !**p).count() as f64;
    let fn_ = rapid.iter().zip(precise).filter(|(r, p)| !**r && **p).count() as f64;
    GateAgreement {
        precision: if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) },
        recall: if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(label: &str, texts: &[&str]) -> Vec<LabeledDoc> {
        texts.iter().map(|t| LabeledDoc::new(label, *t)).collect()
    }

    fn toy_corpus() -> Vec<LabeledDoc> {
        let mut c = docs(
            "ja",
            &[
                "これは日本語の文です", "今日はいい天気ですね", "私は学生です", "東京に住んでいます",
                "ご飯を食べました", "本を読むのが好きです", "明日は雨が降るでしょう", "駅まで歩きます",
                "猫がかわいいです", "日本の夏は暑いです",
            ],
        );
        c.extend(docs(
            "en",
            &[
                "this is an english sentence", "the weather is nice today", "i am a student",
                "we live in london", "she ate her dinner", "reading books is fun",
                "it will rain tomorrow", "walk to the station", "the cat is cute", "summer is hot here",
            ],
        ));
        c
    }

    fn toy_model() -> LangIdModel {
        let crit = FeatureSelectionCriteria { top_all: 1000, top_japanese: 1000, top_chinese: 1, top_per_language: 1000 };
        train_from_corpus(&toy_corpus(), &crit, &TrainerConfig::default()).unwrap()
    }

    #[test]
    fn ngrams_of_short_string() {
        let mut seen = Vec::new();
        for_each_ngram("ab", |g| seen.push(g.to_string()));
        assert_eq!(seen, ["a", "b", "ab"]);
        let mut n = 0;
        for_each_ngram("日本語です", |_| n += 1);
        assert_eq!(n, 5 + 4 + 3);
    }

    #[test]
    fn feature_extraction_counts() {
        let model = LangIdModel::from_parts(
            vec!["a".into(), "ab".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![0.0; 3], vec![0.0; 3]],
            vec![0.0, 0.0],
            true,
        )
        .unwrap();
        let v = model.extract_features("ab").unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(v, vec![(0, s), (1, s), (2, s)]);
        assert!(model.extract_features("xyz").unwrap().is_empty());
        assert!(matches!(model.extract_features("  "), Err(LangIdError::EmptyInput)));
        // NFKC + lowercase before counting.
        assert_eq!(model.extract_features("ＡＢ").unwrap(), v);
    }

    #[test]
    fn separable_training_is_perfect() {
        let model = toy_model();
        assert!(model.converged());
        for d in toy_corpus() {
            assert_eq!(model.classify(&d.text).0, d.label, "{}", d.text);
        }
        assert_eq!(classify_text("", &model), (UNDETERMINED.to_string(), 0.0));
        assert_eq!(classify_text(" \n\t", &model).0, UNDETERMINED);
    }

    #[test]
    fn training_is_deterministic_and_thread_independent() {
        let a = toy_model();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(toy_model);
        assert_eq!(a, b);
    }

    #[test]
    fn min_score_threshold() {
        let model = toy_model();
        let (label, score) = model.classify("日本語です");
        assert_eq!(label, "ja");
        assert_eq!(model.classify_with_min_score("日本語です", Some(score + 1.0)).0, UNDETERMINED);
        assert_eq!(model.classify_with_min_score("日本語です", None).0, "ja");
    }

    #[test]
    fn model_round_trip() {
        let model = toy_model();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        assert_eq!(buf[0], MODEL_VERSION);
        assert_eq!(&buf[1..5], MODEL_MAGIC);
        let back = LangIdModel::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, model);
        buf[0] = 9;
        assert!(matches!(LangIdModel::read_from(&mut buf.as_slice()), Err(LangIdError::Format(_))));
        assert!(model.to_text().starts_with("# lidm v1 labels=2"));
    }

    #[test]
    fn selection_requires_japanese() {
        let c = docs("en", &["a b"]).into_iter().chain(docs("de", &["c d"])).collect::<Vec<_>>();
        assert!(matches!(select_features(&c, &FeatureSelectionCriteria::default()), Err(LangIdError::Corpus(_))));
    }

    #[test]
    fn top_k_ties_are_lexicographic() {
        let got = top_k([("b", 2), ("a", 2), ("c", 2), ("z", 5)].into_iter(), 2);
        let mut got = got;
        got.sort();
        assert_eq!(got, ["a", "z"]);
    }

    #[test]
    fn rapid_gate() {
        let model = toy_model();
        assert!(rapid_japanese_check(b"<html lang=\"ja\"><head>...", &model));
        assert!(rapid_japanese_check(b"<!DOCTYPE html><HTML LANG='ja-JP'><title>Hello</title>", &model));
        assert!(!rapid_japanese_check(b"<html lang=\"en\"><head><title>Hello world</title>", &model));
        assert!(rapid_japanese_check("<html><head><title>日本語のページのタイトルです</title>".as_bytes(), &model));
        assert!(!rapid_japanese_check(b"\x00\x01\x02binary", &model));
        assert!(!rapid_japanese_check(b"", &model));
        // The title beyond the scan window is not seen.
        let mut late = b"<html><head>".to_vec();
        late.extend(std::iter::repeat(b' ').take(RAPID_SCAN_BYTES));
        late.extend("<title>日本語のページです</title>".as_bytes());
        assert!(!rapid_japanese_check(&late, &model));
    }

    #[test]
    fn japanese_tags() {
        for t in ["ja", "JA", "ja-JP", "ja_jp", " ja "] {
            assert!(is_japanese_tag(t), "{t}");
        }
        for t in ["", "jav", "en", "en-ja"] {
            assert!(!is_japanese_tag(t), "{t}");
        }
    }

    #[test]
    fn scoring() {
        let r = score_predictions(&["a", "a", "b", "b"], &["a", "b", "b", "b"]);
        assert_eq!(r.accuracy, 0.75);
        let fa = 2.0 * 1.0 * 0.5 / 1.5;
        let fb = 2.0 * (2.0 / 3.0) * 1.0 / (2.0 / 3.0 + 1.0);
        assert!((r.macro_f1 - (fa + fb) / 2.0).abs() < 1e-12);
        let g = gate_agreement(&[true, true, false, false], &[true, false, true, false]);
        assert_eq!((g.precision, g.recall), (0.5, 0.5));
    }

    #[test]
    fn holdout_split_partitions_each_label() {
        let c = toy_corpus();
        let (train, test) = split_holdout(&c, 0.2, 7);
        assert_eq!(train.len() + test.len(), c.len());
        assert_eq!(test.iter().filter(|d| d.label == "ja").count(), 2);
        assert_eq!(split_holdout(&c, 0.2, 7), (train, test));
    }
}
