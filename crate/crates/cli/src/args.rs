//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use corpusforge::pipeline::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "corpusforge", version, about = "Build a Japanese text corpus from web archives")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Seed for every hash family; fixes the output.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Output directory (for `langdet train`: the model file).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Language model (`.lidm`).
    #[arg(long, global = true, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Skip the markup-level Japanese gate before extraction.
    #[arg(long, global = true)]
    pub no_rapid_gate: bool,
    /// Apply the quality rules before the repetition rules.
    #[arg(long, global = true)]
    pub quality_first: bool,
    /// Keep comment sections during extraction.
    #[arg(long, global = true)]
    pub keep_comments: bool,
    /// Ingest responses with non-2xx status codes.
    #[arg(long, global = true)]
    pub accept_non_2xx: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Every threshold of the configuration, as optional overrides.
#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Minimum characters per document [400].
    #[arg(long, global = true, help_heading = "Quality")]
    pub min_chars: Option<usize>,
    /// Reject below this hiragana share [0.2].
    #[arg(long, global = true, help_heading = "Quality")]
    pub hiragana_floor: Option<f64>,
    /// Reject above this katakana share [0.5].
    #[arg(long, global = true, help_heading = "Quality")]
    pub katakana_ceiling: Option<f64>,
    /// Reject below this share of Japanese characters [0.5].
    #[arg(long, global = true, help_heading = "Quality")]
    pub japanese_char_floor: Option<f64>,
    /// Reject below this mean sentence length [20].
    #[arg(long, global = true, help_heading = "Quality")]
    pub sentence_mean_min: Option<f64>,
    /// Reject above this mean sentence length [90].
    #[arg(long, global = true, help_heading = "Quality")]
    pub sentence_mean_max: Option<f64>,
    /// Reject when the longest sentence exceeds this [200].
    #[arg(long, global = true, help_heading = "Quality")]
    pub longest_sentence_max: Option<usize>,
    /// Reject above this share of sentences ending in an ellipsis [0.2].
    #[arg(long, global = true, help_heading = "Quality")]
    pub ellipsis_sentence_ceiling: Option<f64>,
    /// Reject above this share of characters in NG expressions [0.05].
    #[arg(long, global = true, help_heading = "Quality")]
    pub ng_char_ratio_ceiling: Option<f64>,

    /// Duplicate lines / lines [0.30].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_line_frac: Option<f64>,
    /// Duplicate paragraphs / paragraphs [0.30].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_para_frac: Option<f64>,
    /// Characters in duplicate lines / characters [0.20].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_line_char_frac: Option<f64>,
    /// Characters in duplicate paragraphs / characters [0.20].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_para_char_frac: Option<f64>,
    /// Share of the most frequent character 2-gram [0.20].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub top_2gram_frac: Option<f64>,
    /// Share of the most frequent character 3-gram [0.18].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub top_3gram_frac: Option<f64>,
    /// Share of the most frequent character 4-gram [0.16].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub top_4gram_frac: Option<f64>,
    /// Characters covered by repeated 5-grams [0.15].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_5gram_frac: Option<f64>,
    /// Characters covered by repeated 6-grams [0.14].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_6gram_frac: Option<f64>,
    /// Characters covered by repeated 7-grams [0.13].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_7gram_frac: Option<f64>,
    /// Characters covered by repeated 8-grams [0.12].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_8gram_frac: Option<f64>,
    /// Characters covered by repeated 9-grams [0.11].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_9gram_frac: Option<f64>,
    /// Characters covered by repeated 10-grams [0.10].
    #[arg(long, global = true, help_heading = "Repetition")]
    pub dup_10gram_frac: Option<f64>,

    /// Character shingle length [5].
    #[arg(long, global = true, help_heading = "Dedup")]
    pub shingle_k: Option<usize>,
    /// MinHash values per bucket [20].
    #[arg(long, global = true, help_heading = "Dedup")]
    pub band_size: Option<usize>,
    /// Number of buckets [40].
    #[arg(long, global = true, help_heading = "Dedup")]
    pub band_count: Option<usize>,
    /// Signature cache reused across runs.
    #[arg(long, global = true, help_heading = "Dedup", value_name = "FILE")]
    pub dedup_cache: Option<PathBuf>,

    /// Block hosts whose dating-term page share exceeds this [0.001].
    #[arg(long, global = true, help_heading = "Host filter")]
    pub dating_ratio: Option<f64>,
    /// Block hosts whose NG-expression page share exceeds this [0.005].
    #[arg(long, global = true, help_heading = "Host filter")]
    pub host_ng_ratio: Option<f64>,

    /// Pages whose best language score is below this are undetermined.
    #[arg(long, global = true, help_heading = "Language", allow_hyphen_values = true)]
    pub min_lang_score: Option<f64>,

    /// NG expressions, one per line.
    #[arg(long, global = true, help_heading = "Lists", value_name = "FILE")]
    pub ng_list: Option<PathBuf>,
    /// Dating-site terms, one per line.
    #[arg(long, global = true, help_heading = "Lists", value_name = "FILE")]
    pub dating_list: Option<PathBuf>,
    /// Footer marker phrases, one per line.
    #[arg(long, global = true, help_heading = "Lists", value_name = "FILE")]
    pub footer_markers: Option<PathBuf>,
    /// UT1 blacklist directory (`<dir>/<category>/domains`).
    #[arg(long, global = true, help_heading = "Lists", value_name = "DIR")]
    pub ut1_dir: Option<PathBuf>,
    /// Comma-separated UT1 categories.
    #[arg(long, global = true, help_heading = "Lists", value_delimiter = ',')]
    pub ut1_categories: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download snapshot listings and, optionally, archives.
    Fetch(FetchArgs),
    /// Ingest, rapid gate, extraction and language identification.
    Extract(StageArgs),
    /// The seven quality rules.
    FilterQuality(StageArgs),
    /// The thirteen repetition rules.
    FilterRepetition(StageArgs),
    /// Near-duplicate removal, newest page kept.
    Dedup(StageArgs),
    /// Host statistics, block list and host filtering.
    Hostfilter(HostfilterArgs),
    /// Punctuation normalisation and footer trimming.
    Clean(StageArgs),
    /// Every stage, outputs written to --out.
    Run(RunArgs),
    /// Summarise corpus files or render a stats report.
    Stats(StatsArgs),
    /// Language identifier tools.
    #[command(subcommand)]
    Langdet(LangdetCommand),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Snapshot ids (CC-MAIN-YYYY-WW); defaults to the configured ones.
    #[arg(long = "snapshot", value_name = "ID")]
    pub snapshots: Vec<String>,
    /// Base URL or local mirror directory; defaults to $CORPUSFORGE_CC_BASE
    /// or the public endpoint.
    #[arg(long)]
    pub base: Option<String>,
    /// Also download the first N archives of each snapshot.
    #[arg(long, default_value_t = 0, value_name = "N")]
    pub download: usize,
    /// Attempts per request.
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    /// Input files: WARC archives for `extract`, corpus files otherwise.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output corpus file.
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
    /// Also write the stage's stats report here.
    #[arg(long, value_name = "FILE")]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HostfilterArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    /// Write the block list here.
    #[arg(long, value_name = "FILE")]
    pub blocklist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// WARC archives; defaults to the configured inputs.
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Render this stats report as a table.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Corpus files to summarise.
    pub corpus: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LangdetCommand {
    /// Train a model from a directory of per-language text files.
    Train {
        #[arg(value_name = "DIR")]
        corpus: PathBuf,
        /// Regularisation constant.
        #[arg(long)]
        c: Option<f64>,
        /// Hold out this fraction for evaluation after training.
        #[arg(long)]
        holdout: Option<f64>,
        /// Also write the plain-text export here.
        #[arg(long, value_name = "FILE")]
        text: Option<PathBuf>,
    },
    /// Score a model on a labelled corpus directory.
    Eval {
        #[arg(value_name = "DIR")]
        corpus: PathBuf,
    },
    /// Classify a file (or standard input).
    Classify {
        file: Option<PathBuf>,
        /// Classify each line separately.
        #[arg(long)]
        lines: bool,
    },
}

impl ThresholdArgs {
    /// Writes every given override into `config`.
    pub fn apply(&self, config: &mut PipelineConfig) {
        fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
            if let Some(v) = value {
                *slot = v.clone();
            }
        }
        let q = &mut config.quality;
        set(&mut q.min_chars, &self.min_chars);
        set(&mut q.hiragana_floor, &self.hiragana_floor);
        set(&mut q.katakana_ceiling, &self.katakana_ceiling);
        set(&mut q.japanese_char_floor, &self.japanese_char_floor);
        set(&mut q.sentence_mean_min, &self.sentence_mean_min);
        set(&mut q.sentence_mean_max, &self.sentence_mean_max);
        set(&mut q.longest_sentence_max, &self.longest_sentence_max);
        set(&mut q.ellipsis_sentence_ceiling, &self.ellipsis_sentence_ceiling);
        set(&mut q.ng_char_ratio_ceiling, &self.ng_char_ratio_ceiling);

        let r = &mut config.repetition;
        set(&mut r.dup_line_frac, &self.dup_line_frac);
        set(&mut r.dup_para_frac, &self.dup_para_frac);
        set(&mut r.dup_line_char_frac, &self.dup_line_char_frac);
        set(&mut r.dup_para_char_frac, &self.dup_para_char_frac);
        set(&mut r.top_2gram_frac, &self.top_2gram_frac);
        set(&mut r.top_3gram_frac, &self.top_3gram_frac);
        set(&mut r.top_4gram_frac, &self.top_4gram_frac);
        set(&mut r.dup_5gram_frac, &self.dup_5gram_frac);
        set(&mut r.dup_6gram_frac, &self.dup_6gram_frac);
        set(&mut r.dup_7gram_frac, &self.dup_7gram_frac);
        set(&mut r.dup_8gram_frac, &self.dup_8gram_frac);
        set(&mut r.dup_9gram_frac, &self.dup_9gram_frac);
        set(&mut r.dup_10gram_frac, &self.dup_10gram_frac);

        let d = &mut config.dedup;
        set(&mut d.shingle_k, &self.shingle_k);
        set(&mut d.band_size, &self.band_size);
        set(&mut d.band_count, &self.band_count);
        if self.dedup_cache.is_some() {
            config.dedup_cache = self.dedup_cache.clone();
        }

        set(&mut config.host.dating_ratio, &self.dating_ratio);
        set(&mut config.host.ng_ratio, &self.host_ng_ratio);
        if self.min_lang_score.is_some() {
            config.min_lang_score = self.min_lang_score;
        }

        let l = &mut config.lists;
        for (slot, value) in [
            (&mut l.ng, &self.ng_list),
            (&mut l.dating, &self.dating_list),
            (&mut l.footer_markers, &self.footer_markers),
            (&mut l.ut1_dir, &self.ut1_dir),
        ] {
            if value.is_some() {
                *slot = value.clone();
            }
        }
        set(&mut l.ut1_categories, &self.ut1_categories);
    }
}

impl GlobalArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(w) = self.workers {
            config.workers = w;
        }
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if self.model.is_some() {
            config.model = self.model.clone();
        }
        if self.no_rapid_gate {
            config.rapid_gate = false;
        }
        if self.quality_first {
            config.repetition_first = false;
        }
        if self.keep_comments {
            config.drop_comment_sections = false;
        }
        if self.accept_non_2xx {
            config.accept_non_2xx = true;
        }
    }
}
