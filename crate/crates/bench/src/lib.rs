//! Deterministic inputs shared by the benchmarks.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use corpusforge::langid::{self, FeatureSelectionCriteria, LangIdModel, TrainerConfig};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HIRAGANA: &str = "あいうえおかきくけこさしすせそたちつてとなにぬねのはひふへほまみむめもやゆよらりるれろわをん";
const KATAKANA: &str = "アイウエオカキクケコサシスセソタチツテトナニヌネノ";
const KANJI: &str = "日本語文章自然言語処理学習資料記事情報旅行料理写真地域生活時間社会研究";

pub fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// Raw HTML bodies of the end-to-end fixture pages.
pub fn fixture_pages() -> Vec<(String, Vec<u8>)> {
    let dir = core_fixtures().join("e2e");
    let manifest = std::fs::read_to_string(dir.join("manifest.tsv")).expect("fixture manifest");
    manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let body = std::fs::read(dir.join("pages").join(f[0])).expect("fixture page");
            (f[1].to_string(), body)
        })
        .collect()
}

/// Model trained on the language-ID fixture corpus.
pub fn fixture_model() -> LangIdModel {
    let corpus = langid::load_corpus_dir(core_fixtures().join("langid")).expect("langid fixtures");
    langid::train_from_corpus(&corpus, &FeatureSelectionCriteria::default(), &TrainerConfig::default())
        .expect("training")
}

/// Japanese-looking prose: mostly hiragana, with kanji and katakana,
/// split into lines of a few sentences.
pub fn japanese_text(rng: &mut impl Rng, chars: usize) -> String {
    let pools: [Vec<char>; 3] = [HIRAGANA.chars().collect(), KANJI.chars().collect(), KATAKANA.chars().collect()];
    let mut out = String::new();
    let mut n = 0;
    let mut sentence = 0;
    while n < chars {
        let pool = match rng.random_range(0..10) {
            0..=5 => &pools[0],
            6..=8 => &pools[1],
            _ => &pools[2],
        };
        out.push(*pool.choose(rng).unwrap());
        n += 1;
        sentence += 1;
        if sentence > 20 && rng.random_bool(0.1) {
            out.push('。');
            sentence = 0;
            if rng.random_bool(0.3) {
                out.push('\n');
            }
        }
    }
    out.push('。');
    out
}

/// `n` documents of about `chars` characters; every tenth one is a light
/// edit of its predecessor so that deduplication has work to do.
pub fn corpus(n: usize, chars: usize, seed: u64) -> Vec<(String, String, DateTime<Utc>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epoch = DateTime::<Utc>::UNIX_EPOCH + Duration::days(19_000);
    let mut docs: Vec<(String, String, DateTime<Utc>)> = Vec::with_capacity(n);
    for i in 0..n {
        let text = match docs.last() {
            Some((_, prev, _)) if i % 10 == 9 => {
                let mut t = prev.clone();
                t.push_str("追記です。");
                t
            }
            _ => japanese_text(&mut rng, chars),
        };
        docs.push((format!("https://host{}.example.jp/{i}", i % 50), text, epoch + Duration::hours(i as i64)));
    }
    docs
}
