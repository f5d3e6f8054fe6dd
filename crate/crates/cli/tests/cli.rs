//! The `corpusforge` binary against the core crate's fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use corpusforge::pipeline::{self, StatsReport};
use corpusforge::warc::write::{gzip_member, response_member};
use tempfile::TempDir;

fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corpusforge"))
        .args(args)
        .env_remove("CORPUSFORGE_CC_BASE")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = bin(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The end-to-end fixture packed as one archive.
fn e2e_warc(dir: &Path) -> PathBuf {
    let fixtures = core_fixtures().join("e2e");
    let manifest = fs::read_to_string(fixtures.join("manifest.tsv")).unwrap();
    let mut bytes = Vec::new();
    for line in manifest.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        let ts: DateTime<Utc> = DateTime::parse_from_rfc3339(f[2]).unwrap().with_timezone(&Utc);
        let body = fs::read(fixtures.join("pages").join(f[0])).unwrap();
        bytes.extend(response_member(f[1], ts, f[3], &body));
    }
    let path = dir.join("e2e.warc.gz");
    fs::write(&path, bytes).unwrap();
    path
}

/// A model trained once through the CLI and shared by every test.
fn model() -> &'static Path {
    static MODEL: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    let (_, path) = MODEL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixture.lidm");
        ok(&["langdet", "train", s(&core_fixtures().join("langid")), "--out", s(&path)]);
        (dir, path)
    });
    path
}

fn read_report(path: &Path) -> StatsReport {
    StatsReport::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&bin(&["--help"])), 0);
    assert_eq!(code(&bin(&["--version"])), 0);
    assert_eq!(code(&bin(&["dedup", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bin(&[])), 1);
    assert_eq!(code(&bin(&["no-such-command"])), 1);
    assert_eq!(code(&bin(&["dedup"])), 1, "missing inputs");
    assert_eq!(code(&bin(&["dedup", "x.jsonl", "--band-size", "0"])), 1, "invalid threshold");
    assert_eq!(code(&bin(&["dedup", "x.jsonl", "--config", "/nonexistent/config.toml"])), 1);
    assert_eq!(code(&bin(&["fetch", "--snapshot", "CC-MAIN-24-1", "--base", "/tmp"])), 1);
    assert_eq!(code(&bin(&["langdet", "classify"])), 1, "no model");
}

#[test]
fn unreadable_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.jsonl");
    let out = dir.path().join("out.jsonl");
    assert_eq!(code(&bin(&["filter-quality", s(&missing), "-o", s(&out)])), 2);
    let garbage = dir.path().join("garbage.jsonl");
    fs::write(&garbage, "{not json\n").unwrap();
    assert_eq!(code(&bin(&["clean", s(&garbage), "-o", s(&out)])), 2);
}

#[test]
fn run_produces_the_expected_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let warc = e2e_warc(dir.path());
    let out = dir.path().join("out");
    ok(&["run", s(&warc), "--model", s(model()), "--out", s(&out)]);
    let docs = pipeline::read_corpus_file(out.join(pipeline::CORPUS_FILE)).unwrap();
    assert_eq!(docs.len(), 3);
    assert!(!out.join(pipeline::INCOMPLETE_MARKER).exists());
    let report = read_report(&out.join(pipeline::STATS_FILE));
    assert!(report.complete);
    assert_eq!(report.stage(pipeline::STAGE_CLEAN).unwrap().output_docs, 3);
}

#[test]
fn chained_stage_commands_match_a_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let warc = e2e_warc(dir.path());
    let full = dir.path().join("full");
    ok(&["run", s(&warc), "--model", s(model()), "--out", s(&full)]);

    let step = |name: &str| dir.path().join(format!("{name}.jsonl"));
    ok(&["extract", s(&warc), "--model", s(model()), "-o", s(&step("extract"))]);
    ok(&["filter-repetition", s(&step("extract")), "-o", s(&step("repetition"))]);
    ok(&["filter-quality", s(&step("repetition")), "-o", s(&step("quality"))]);
    ok(&["dedup", s(&step("quality")), "-o", s(&step("dedup"))]);
    let blocklist = dir.path().join("blocklist.txt");
    ok(&["hostfilter", s(&step("dedup")), "-o", s(&step("host")), "--blocklist", s(&blocklist)]);
    ok(&["clean", s(&step("host")), "-o", s(&step("clean"))]);

    assert_eq!(
        fs::read(step("clean")).unwrap(),
        fs::read(full.join(pipeline::CORPUS_FILE)).unwrap()
    );
    assert_eq!(
        fs::read_to_string(&blocklist).unwrap(),
        fs::read_to_string(full.join(pipeline::BLOCKLIST_FILE)).unwrap()
    );
}

#[test]
fn truncated_archive_exits_three_and_marks_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let warc = e2e_warc(dir.path());
    let bytes = fs::read(&warc).unwrap();
    fs::write(&warc, &bytes[..bytes.len() * 2 / 3]).unwrap();
    let out = dir.path().join("out");
    let res = bin(&["run", s(&warc), "--model", s(model()), "--out", s(&out)]);
    assert_eq!(code(&res), 3, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join(pipeline::INCOMPLETE_MARKER).exists());
    assert!(out.join(pipeline::CORPUS_FILE).exists());
}

#[test]
fn missing_archive_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let absent = dir.path().join("absent.warc.gz");
    assert_eq!(code(&bin(&["run", s(&absent), "--model", s(model()), "--out", s(&out)])), 2);
    assert!(out.join(pipeline::INCOMPLETE_MARKER).exists());
}

#[test]
fn empty_archive_gives_an_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let warc = dir.path().join("empty.warc.gz");
    fs::write(&warc, b"").unwrap();
    let out = dir.path().join("out");
    ok(&["run", s(&warc), "--model", s(model()), "--out", s(&out)]);
    assert_eq!(fs::read_to_string(out.join(pipeline::CORPUS_FILE)).unwrap(), "");
    let report = read_report(&out.join(pipeline::STATS_FILE));
    assert!(report.complete);
    for stage in &report.stages {
        assert_eq!((stage.input_docs, stage.output_docs, stage.rejected()), (0, 0, 0), "{}", stage.stage);
    }
}

fn quality_input(dir: &Path) -> PathBuf {
    let mut text = fs::read_to_string(core_fixtures().join("e2e/expected_corpus.jsonl")).unwrap();
    for (i, body) in ["短い。", "これも短い文です。"].iter().enumerate() {
        let doc = serde_json::json!({
            "url": format!("https://short.example.jp/{i}"),
            "host": "short.example.jp",
            "timestamp": "2024-01-01T00:00:00Z",
            "text": body,
        });
        text.push_str(&format!("{doc}\n"));
    }
    let path = dir.join("quality_in.jsonl");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn quality_filter_drops_short_documents() {
    let dir = tempfile::tempdir().unwrap();
    let input = quality_input(dir.path());
    let out = dir.path().join("q.jsonl");
    let stats = dir.path().join("q.json");
    // Footer trimming can leave cleaned pages under the default minimum.
    ok(&["filter-quality", s(&input), "-o", s(&out), "--stats", s(&stats), "--min-chars", "50"]);
    assert_eq!(pipeline::read_corpus_file(&out).unwrap().len(), 3);
    let report = read_report(&stats);
    let q = report.stage(pipeline::STAGE_QUALITY).unwrap();
    assert_eq!((q.input_docs, q.output_docs), (5, 3));
    assert_eq!(q.rejections["min_chars"], 2);
}

#[test]
fn threshold_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = quality_input(dir.path());
    let config = dir.path().join("config.toml");
    fs::write(&config, "[quality]\nmin_chars = 100000\n").unwrap();
    let out = dir.path().join("q.jsonl");

    ok(&["filter-quality", s(&input), "-o", s(&out), "--config", s(&config)]);
    assert_eq!(pipeline::read_corpus_file(&out).unwrap().len(), 0);

    ok(&["filter-quality", s(&input), "-o", s(&out), "--config", s(&config), "--min-chars", "50"]);
    assert_eq!(pipeline::read_corpus_file(&out).unwrap().len(), 3);
}

#[test]
fn dedup_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    let mut text = fs::read_to_string(core_fixtures().join("e2e/expected_corpus.jsonl")).unwrap();
    text = text.clone() + &text;
    fs::write(&input, text).unwrap();
    let once = dir.path().join("once.jsonl");
    let twice = dir.path().join("twice.jsonl");
    let stats = dir.path().join("twice.json");
    ok(&["dedup", s(&input), "-o", s(&once)]);
    assert_eq!(pipeline::read_corpus_file(&once).unwrap().len(), 3);
    ok(&["dedup", s(&once), "-o", s(&twice), "--stats", s(&stats)]);
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
    assert_eq!(read_report(&stats).stage(pipeline::STAGE_DEDUP).unwrap().rejected(), 0);
}

#[test]
fn stats_summarises_a_corpus() {
    let corpus = core_fixtures().join("e2e/expected_corpus.jsonl");
    let out = ok(&["stats", s(&corpus)]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["documents"], 3);
    assert_eq!(summary["hosts"], 3);
}

#[test]
fn langdet_classifies_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("lines.txt");
    fs::write(&input, "今日はとても良い天気ですね。散歩に行きましょう。\nThe weather is lovely today, let us go for a walk.\n").unwrap();
    let out = ok(&["langdet", "classify", s(&input), "--lines", "--model", s(model())]);
    let labels: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(labels, ["ja", "en"]);
}

#[test]
fn fetch_reads_a_local_mirror_from_the_environment() {
    let mirror = tempfile::tempdir().unwrap();
    let id = "CC-MAIN-2024-10";
    let listing_dir = mirror.path().join("crawl-data").join(id);
    fs::create_dir_all(&listing_dir).unwrap();
    let paths = ["crawl-data/CC-MAIN-2024-10/segments/1/warc/a.warc.gz", "crawl-data/CC-MAIN-2024-10/segments/1/warc/b.warc.gz"];
    let mut gz = Vec::new();
    gzip_member(&mut gz, format!("{}\n{}\n", paths[0], paths[1]).as_bytes()).unwrap();
    fs::write(listing_dir.join("warc.paths.gz"), gz).unwrap();
    for p in paths {
        let f = mirror.path().join(p);
        fs::create_dir_all(f.parent().unwrap()).unwrap();
        fs::write(&f, p).unwrap();
    }

    let out = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_corpusforge"))
        .args(["fetch", "--snapshot", id, "--download", "1", "--out", s(out.path())])
        .env("CORPUSFORGE_CC_BASE", mirror.path())
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let listing = fs::read_to_string(out.path().join(format!("{id}.paths"))).unwrap();
    assert_eq!(listing.lines().collect::<Vec<_>>(), paths);
    assert_eq!(fs::read_to_string(out.path().join(id).join("a.warc.gz")).unwrap(), paths[0]);
    assert!(!out.path().join(id).join("b.warc.gz").exists());
}
