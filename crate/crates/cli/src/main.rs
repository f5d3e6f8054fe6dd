mod args;
mod fetch;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use corpusforge::langid::{self, FeatureSelectionCriteria, LangIdError, LangIdModel, TrainerConfig};
use corpusforge::pipeline::{self, PipelineConfig, PipelineError, Resources, Stage, StageOutput, StatsReport};
use corpusforge::warc::{self, ListingError};

use args::{Cli, Command, LangdetCommand, StageArgs};

/// A problem with the invocation rather than the data.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

enum Outcome {
    Done,
    Incomplete,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Incomplete) => {
            eprintln!("warning: run incomplete; see the report's errors");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    if let Some(p) = e.downcast_ref::<PipelineError>() {
        return p.exit_code() as u8;
    }
    match e.downcast_ref::<ListingError>() {
        Some(ListingError::InvalidSnapshotId(_)) => 1,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.global.apply(&mut config);
    cli.thresholds.apply(&mut config);
    config.validate()?;
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Fetch(a) => {
            let base = a.base.clone().unwrap_or_else(warc::cc_base_from_env);
            let source = fetch::Source::new(&base, a.retries);
            let ids = if a.snapshots.is_empty() { &config.snapshots } else { &a.snapshots };
            if ids.is_empty() {
                return Err(usage("no snapshot ids given (use --snapshot or the config's `snapshots`)"));
            }
            for id in ids {
                let snapshot = fetch::fetch_snapshot(&source, id, &config.out_dir, a.download)?;
                println!("{snapshot}");
            }
            Ok(Outcome::Done)
        }
        Command::Extract(a) => single_stage(Stage::Extract, a, &config, None),
        Command::FilterQuality(a) => single_stage(Stage::Quality, a, &config, None),
        Command::FilterRepetition(a) => single_stage(Stage::Repetition, a, &config, None),
        Command::Dedup(a) => single_stage(Stage::Dedup, a, &config, None),
        Command::Hostfilter(a) => single_stage(Stage::HostFilter, &a.stage, &config, a.blocklist.as_deref()),
        Command::Clean(a) => single_stage(Stage::Clean, a, &config, None),
        Command::Run(a) => {
            let mut config = config.clone();
            if !a.inputs.is_empty() {
                config.inputs = a.inputs.clone();
            }
            let resources = Resources::load(&config)?;
            let out = pipeline::run_pipeline(&config, &resources)?;
            print!("{}", out.report.render_table());
            eprintln!("wrote {} documents to {}", out.docs.len(), config.out_dir.display());
            Ok(finish(&out.report))
        }
        Command::Stats(a) => {
            if a.report.is_none() && a.corpus.is_empty() {
                return Err(usage("give --report FILE and/or corpus files"));
            }
            if let Some(path) = &a.report {
                let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
                let report = StatsReport::from_json(&text).with_context(|| format!("{} is not a stats report", path.display()))?;
                print!("{}", report.render_table());
            }
            if !a.corpus.is_empty() {
                let mut docs = Vec::new();
                for p in &a.corpus {
                    docs.extend(pipeline::read_corpus_file(p)?);
                }
                println!("{}", serde_json::to_string_pretty(&pipeline::summarize(&docs))?);
            }
            Ok(Outcome::Done)
        }
        Command::Langdet(cmd) => langdet(cmd, &cli, &config),
    }
}

fn finish(report: &StatsReport) -> Outcome {
    if report.complete {
        Outcome::Done
    } else {
        Outcome::Incomplete
    }
}

fn single_stage(stage: Stage, a: &StageArgs, config: &PipelineConfig, blocklist: Option<&Path>) -> Result<Outcome> {
    let resources = Resources::load(config)?;
    let out: StageOutput = pipeline::run_stage(stage.name(), &a.inputs, &a.output, config, &resources)?;
    print!("{}", out.report.render_table());
    if let Some(path) = &a.stats {
        fs::write(path, out.report.to_json())?;
    }
    if let (Some(path), Some(list)) = (blocklist, &out.blocklist) {
        fs::write(path, list.to_text())?;
    }
    Ok(finish(&out.report))
}

fn model_path(config: &PipelineConfig) -> Result<&PathBuf> {
    config.model.as_ref().ok_or_else(|| usage("no language model given (use --model)"))
}

fn load_model(config: &PipelineConfig) -> Result<LangIdModel> {
    let path = model_path(config)?;
    LangIdModel::load(path).map_err(|e| match e {
        LangIdError::Io(ref io) if io.kind() == io::ErrorKind::NotFound => usage(format!("{}: {e}", path.display())),
        other => anyhow::Error::new(other).context(path.display().to_string()),
    })
}

fn langdet(cmd: &LangdetCommand, cli: &Cli, config: &PipelineConfig) -> Result<Outcome> {
    if let Some(n) = cli.global.workers {
        // Training parallelises across labels on the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cmd {
        LangdetCommand::Train { corpus, c, holdout, text } => {
            let out = cli
                .global
                .out
                .as_ref()
                .ok_or_else(|| usage("langdet train needs --out <model file>"))?;
            let docs = langid::load_corpus_dir(corpus)?;
            let mut trainer = TrainerConfig::default();
            if let Some(c) = c {
                trainer.regularization_c = *c;
            }
            if let Some(seed) = config.seed {
                trainer.seed = seed;
            }
            let (train, test) = match holdout {
                Some(f) if !(0.0..1.0).contains(f) => return Err(usage("--holdout must lie in [0, 1)")),
                Some(f) => langid::split_holdout(&docs, *f, trainer.seed),
                None => (docs, Vec::new()),
            };
            let model = langid::train_from_corpus(&train, &FeatureSelectionCriteria::default(), &trainer)
                .map_err(|e| match e {
                    LangIdError::Config(m) => usage(m),
                    other => other.into(),
                })?;
            if !model.converged() {
                log::warn!("training stopped at the epoch limit before converging");
            }
            model.save(out)?;
            if let Some(path) = text {
                fs::write(path, model.to_text())?;
            }
            eprintln!(
                "trained {} labels, {} features on {} documents -> {}",
                model.labels().len(),
                model.feature_count(),
                train.len(),
                out.display()
            );
            if !test.is_empty() {
                println!("{}", serde_json::to_string_pretty(&langid::evaluate(&model, &test))?);
            }
            Ok(Outcome::Done)
        }
        LangdetCommand::Eval { corpus } => {
            let model = load_model(config)?;
            let docs = langid::load_corpus_dir(corpus)?;
            println!("{}", serde_json::to_string_pretty(&langid::evaluate(&model, &docs))?);
            Ok(Outcome::Done)
        }
        LangdetCommand::Classify { file, lines } => {
            let model = load_model(config)?;
            let mut text = String::new();
            match file {
                Some(p) => text = fs::read_to_string(p).with_context(|| p.display().to_string())?,
                None => {
                    io::stdin().read_to_string(&mut text)?;
                }
            }
            let mut stdout = io::stdout().lock();
            let inputs: Vec<&str> = if *lines {
                text.lines().filter(|l| !l.trim().is_empty()).collect()
            } else {
                vec![text.as_str()]
            };
            for t in inputs {
                let (label, score) = model.classify_with_min_score(t, config.min_lang_score);
                writeln!(stdout, "{label}\t{score:.4}")?;
            }
            Ok(Outcome::Done)
        }
    }
}
