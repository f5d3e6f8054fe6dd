//! Near-duplicate removal with MinHash signatures and banded LSH.
//!
//! Documents are shingled into character k-grams. Each of the `b × r`
//! signature positions holds the minimum of one seeded 64-bit hash function
//! over the shingle set. The signature is cut into `r` bands of `b`
//! consecutive values; two documents are duplicates when any band is
//! identical. Duplicate pairs are closed transitively into clusters and each
//! cluster keeps its most recently crawled member (smallest URL, then
//! smallest id, on ties), which makes the result independent of input order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

/// Hash family description, recorded in statistics output.
pub const HASH_FAMILY: &str =
    "h_i(x) = fmix64(xxh3_64(utf8(x)) ^ seed_i); seed_i = splitmix64 stream from hash_seed";

#[derive(Debug, Error)]
pub enum DedupError {
    #[error("invalid dedup configuration: {0}")]
    Config(String),
    #[error("document id `{0}` occurs more than once")]
    DuplicateId(String),
    #[error("signature cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    /// Character n-gram length used for shingles.
    pub shingle_k: usize,
    /// MinHash values concatenated into one bucket key.
    pub band_size: usize,
    /// Number of buckets compared per document pair.
    pub band_count: usize,
    pub hash_seed: u64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            shingle_k: 5,
            band_size: 20,
            band_count: 40,
            hash_seed: 0x6a09_e667_f3bc_c908,
        }
    }
}

impl DedupConfig {
    pub fn signature_len(&self) -> usize {
        self.band_size * self.band_count
    }

    pub fn validate(&self) -> Result<(), DedupError> {
        if self.shingle_k == 0 || self.band_size == 0 || self.band_count == 0 {
            return Err(DedupError::Config(
                "shingle_k, band_size and band_count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Set of contiguous character k-grams. Texts shorter than `k` yield the
/// whole text as a single shingle; empty text yields the empty set.
pub fn shingle(text: &str, k: usize) -> HashSet<String> {
    assert!(k >= 1, "shingle length must be positive");
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return HashSet::new();
    }
    if chars.len() < k {
        return HashSet::from([text.to_string()]);
    }
    chars.windows(k).map(|w| w.iter().collect()).collect()
}

fn shingle_base_hashes(text: &str, k: usize) -> Vec<u64> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    if n_chars == 0 {
        return Vec::new();
    }
    let mut hashes: Vec<u64> = if n_chars < k {
        vec![xxh3_64(text.as_bytes())]
    } else {
        (0..=n_chars - k)
            .map(|i| xxh3_64(&text.as_bytes()[bounds[i]..bounds[i + k]]))
            .collect()
    };
    hashes.sort_unstable();
    hashes.dedup();
    hashes
}

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fixed-length vector of MinHash values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinHashSignature {
    pub values: Vec<u64>,
}

impl MinHashSignature {
    /// Signature of the empty shingle set. It never matches anything,
    /// including another sentinel.
    pub fn sentinel(len: usize) -> Self {
        Self {
            values: vec![u64::MAX; len],
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.values.iter().all(|&v| v == u64::MAX)
    }

    pub fn band(&self, index: usize, band_size: usize) -> &[u64] {
        &self.values[index * band_size..(index + 1) * band_size]
    }

    /// Fraction of positions with equal values (a Jaccard estimate).
    pub fn agreement(&self, other: &MinHashSignature) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let equal = self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a == b)
            .count();
        equal as f64 / self.values.len() as f64
    }

    /// Index of the first identical band, if any.
    pub fn first_matching_band(&self, other: &MinHashSignature, band_size: usize) -> Option<usize> {
        if self.is_sentinel() || other.is_sentinel() {
            return None;
        }
        let bands = self.values.len() / band_size;
        (0..bands).find(|&j| self.band(j, band_size) == other.band(j, band_size))
    }
}

/// The seeded hash family for one configuration.
#[derive(Debug, Clone)]
pub struct MinHasher {
    config: DedupConfig,
    seeds: Vec<u64>,
}

impl MinHasher {
    pub fn new(config: DedupConfig) -> Result<Self, DedupError> {
        config.validate()?;
        let mut state = config.hash_seed;
        let seeds = (0..config.signature_len())
            .map(|_| splitmix64(&mut state))
            .collect();
        Ok(Self { config, seeds })
    }

    pub fn config(&self) -> &DedupConfig {
        &self.config
    }

    fn signature_from_base(&self, base: &[u64]) -> MinHashSignature {
        if base.is_empty() {
            return MinHashSignature::sentinel(self.seeds.len());
        }
        let values = self
            .seeds
            .iter()
            .map(|&seed| base.iter().map(|&h| fmix64(h ^ seed)).min().unwrap())
            .collect();
        MinHashSignature { values }
    }

    /// Signature of an explicit shingle set.
    pub fn signature<I, S>(&self, shingles: I) -> MinHashSignature
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut base: Vec<u64> = shingles
            .into_iter()
            .map(|s| xxh3_64(s.as_ref().as_bytes()))
            .collect();
        base.sort_unstable();
        base.dedup();
        self.signature_from_base(&base)
    }

    /// Shingles `text` and computes its signature without materialising
    /// shingle strings.
    pub fn signature_of_text(&self, text: &str) -> MinHashSignature {
        self.signature_from_base(&shingle_base_hashes(text, self.config.shingle_k))
    }
}

/// Convenience wrapper around [`MinHasher::signature`].
pub fn minhash_signature(
    shingles: &HashSet<String>,
    config: &DedupConfig,
) -> Result<MinHashSignature, DedupError> {
    Ok(MinHasher::new(config.clone())?.signature(shingles))
}

/// Probability that two documents with Jaccard similarity `s` share at least
/// one of `r` bands of `b` values: `1 - (1 - s^b)^r`.
pub fn detection_probability(s: f64, b: u32, r: u32) -> f64 {
    assert!((0.0..=1.0).contains(&s), "Jaccard similarity must lie in [0, 1]");
    1.0 - (1.0 - s.powi(b as i32)).powi(r as i32)
}

/// One document as seen by the deduplicator.
#[derive(Debug, Clone, Copy)]
pub struct DedupDoc<'a> {
    pub id: &'a str,
    pub text: &'a str,
    pub timestamp: DateTime<Utc>,
    pub url: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DedupVerdict {
    pub kept: String,
    pub removed: String,
    /// First band in which the removed document shares its bucket with the
    /// kept document, or with another cluster member when the two are only
    /// linked transitively.
    pub matching_band: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupOutcome {
    pub survivors: BTreeSet<String>,
    /// Sorted by removed id.
    pub verdicts: Vec<DedupVerdict>,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Computes signatures (in parallel) and deduplicates.
pub fn deduplicate(docs: &[DedupDoc<'_>], config: &DedupConfig) -> Result<DedupOutcome, DedupError> {
    let hasher = MinHasher::new(config.clone())?;
    let signatures: Vec<MinHashSignature> = docs
        .par_iter()
        .map(|d| hasher.signature_of_text(d.text))
        .collect();
    deduplicate_signatures(docs, &signatures, config)
}

/// Deduplicates documents whose signatures are already known.
pub fn deduplicate_signatures(
    docs: &[DedupDoc<'_>],
    signatures: &[MinHashSignature],
    config: &DedupConfig,
) -> Result<DedupOutcome, DedupError> {
    config.validate()?;
    assert_eq!(docs.len(), signatures.len());
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d.id) {
            return Err(DedupError::DuplicateId(d.id.to_string()));
        }
    }
    let b = config.band_size;

    // Per band: links from each document to the first earlier document with
    // the same bucket key, plus whether each document's key is shared.
    let per_band: Vec<(Vec<(usize, usize)>, Vec<usize>)> = (0..config.band_count)
        .into_par_iter()
        .map(|band| {
            let mut table: HashMap<&[u64], usize> = HashMap::new();
            let mut links = Vec::new();
            let mut shared = HashSet::new();
            for (i, sig) in signatures.iter().enumerate() {
                if sig.is_sentinel() {
                    continue;
                }
                match table.entry(sig.band(band, b)) {
                    std::collections::hash_map::Entry::Occupied(e) => {
                        links.push((*e.get(), i));
                        shared.insert(*e.get());
                        shared.insert(i);
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(i);
                    }
                }
            }
            let mut shared: Vec<usize> = shared.into_iter().collect();
            shared.sort_unstable();
            (links, shared)
        })
        .collect();

    let mut sets = DisjointSet::new(docs.len());
    let mut first_shared_band = vec![usize::MAX; docs.len()];
    for (band, (links, shared)) in per_band.iter().enumerate() {
        for &(a, c) in links {
            sets.union(a, c);
        }
        for &i in shared {
            first_shared_band[i] = first_shared_band[i].min(band);
        }
    }

    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..docs.len() {
        clusters.entry(sets.find(i)).or_default().push(i);
    }

    let mut outcome = DedupOutcome::default();
    for members in clusters.values() {
        let winner = *members
            .iter()
            .max_by(|&&x, &&y| {
                let (dx, dy) = (&docs[x], &docs[y]);
                dx.timestamp
                    .cmp(&dy.timestamp)
                    .then_with(|| dy.url.cmp(dx.url))
                    .then_with(|| dy.id.cmp(dx.id))
            })
            .expect("clusters are non-empty");
        outcome.survivors.insert(docs[winner].id.to_string());
        for &m in members.iter().filter(|&&m| m != winner) {
            let band = signatures[m]
                .first_matching_band(&signatures[winner], b)
                .unwrap_or(first_shared_band[m]);
            outcome.verdicts.push(DedupVerdict {
                kept: docs[winner].id.to_string(),
                removed: docs[m].id.to_string(),
                matching_band: band,
            });
        }
    }
    outcome.verdicts.sort_by(|x, y| x.removed.cmp(&y.removed));
    Ok(outcome)
}

/// Documents seen and kept for one crawl month.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthStats {
    pub input: u64,
    pub kept: u64,
}

impl MonthStats {
    pub fn non_duplicate_rate(&self) -> f64 {
        if self.input == 0 {
            0.0
        } else {
            self.kept as f64 / self.input as f64
        }
    }
}

/// Per crawl month (`YYYY-MM`), input and surviving document counts.
pub fn stats_by_month(docs: &[DedupDoc<'_>], outcome: &DedupOutcome) -> BTreeMap<String, MonthStats> {
    let mut out: BTreeMap<String, MonthStats> = BTreeMap::new();
    for d in docs {
        let key = format!("{:04}-{:02}", d.timestamp.year(), d.timestamp.month());
        let entry = out.entry(key).or_default();
        entry.input += 1;
        if outcome.survivors.contains(d.id) {
            entry.kept += 1;
        }
    }
    out
}

const CACHE_MAGIC: &[u8; 4] = b"MHSC";
const CACHE_VERSION: u8 = 1;

/// On-disk cache of signatures keyed by document id, so re-runs can skip
/// signature computation. Entries are only reused when the text hash and the
/// hashing configuration match.
#[derive(Debug, Clone, Default)]
pub struct SignatureCache {
    config: DedupConfig,
    entries: BTreeMap<String, (u64, MinHashSignature)>,
}

impl SignatureCache {
    pub fn new(config: DedupConfig) -> Self {
        Self {
            config,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str, text: &str) -> Option<&MinHashSignature> {
        self.entries
            .get(id)
            .filter(|(h, _)| *h == xxh3_64(text.as_bytes()))
            .map(|(_, s)| s)
    }

    pub fn insert(&mut self, id: &str, text: &str, signature: MinHashSignature) {
        assert_eq!(signature.values.len(), self.config.signature_len());
        self.entries
            .insert(id.to_string(), (xxh3_64(text.as_bytes()), signature));
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        let c = &self.config;
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&[CACHE_VERSION])?;
        for v in [c.shingle_k, c.band_size, c.band_count] {
            w.write_all(&(v as u32).to_le_bytes())?;
        }
        w.write_all(&c.hash_seed.to_le_bytes())?;
        w.write_all(&(HASH_FAMILY.len() as u32).to_le_bytes())?;
        w.write_all(HASH_FAMILY.as_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for (id, (text_hash, sig)) in &self.entries {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            w.write_all(&text_hash.to_le_bytes())?;
            for v in &sig.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read, expected: &DedupConfig) -> Result<Self, DedupError> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic[..4] != CACHE_MAGIC {
            return Err(DedupError::Cache("bad magic".into()));
        }
        if magic[4] != CACHE_VERSION {
            return Err(DedupError::Cache(format!("unsupported version {}", magic[4])));
        }
        let shingle_k = read_u32(r)? as usize;
        let band_size = read_u32(r)? as usize;
        let band_count = read_u32(r)? as usize;
        let hash_seed = read_u64(r)?;
        let family_len = read_u32(r)? as usize;
        let mut family = vec![0u8; family_len];
        r.read_exact(&mut family)?;
        let config = DedupConfig {
            shingle_k,
            band_size,
            band_count,
            hash_seed,
        };
        if &config != expected || family != HASH_FAMILY.as_bytes() {
            return Err(DedupError::Cache(
                "cache was written with a different hashing configuration".into(),
            ));
        }
        let count = read_u64(r)?;
        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let id_len = read_u32(r)? as usize;
            let mut id = vec![0u8; id_len];
            r.read_exact(&mut id)?;
            let id = String::from_utf8(id).map_err(|_| DedupError::Cache("id is not UTF-8".into()))?;
            let text_hash = read_u64(r)?;
            let values = (0..config.signature_len())
                .map(|_| read_u64(r))
                .collect::<io::Result<Vec<u64>>>()?;
            entries.insert(id, (text_hash, MinHashSignature { values }));
        }
        Ok(Self { config, entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    /// Loads a cache; a missing file yields an empty cache.
    pub fn load_or_empty(path: impl AsRef<Path>, config: &DedupConfig) -> Result<Self, DedupError> {
        match File::open(path) {
            Ok(f) => Self::read_from(&mut BufReader::new(f), config),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new(config.clone())),
            Err(e) => Err(e.into()),
        }
    }
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
