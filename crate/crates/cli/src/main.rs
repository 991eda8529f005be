//! `anonloss`: anonymize a corpus, extract model signals, test firm
//! recognition, and regress returns on the signals to measure what masking
//! costs.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anonloss::synthetic::SyntheticConfig;
use anonloss::Error;
use clap::{Args, Parser, Subcommand};

use crate::config::{FileConfig, Overrides, Settings};
use crate::stages::Runner;

#[derive(Debug, Parser)]
#[command(name = "anonloss", version, about = "Measure the information lost when financial text is anonymized")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for recognition, model calls and fits.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// mock or http.
    #[arg(long, global = true)]
    provider: Option<String>,
    /// Comma-separated entity categories to mask (numbers, places, objects,
    /// others, all); selects RAW plus the matching variant.
    #[arg(long, global = true)]
    categories: Option<String>,
    /// Comma-separated variants, e.g. RAW,TRF,NUM.
    #[arg(long, global = true)]
    variants: Option<String>,
    /// Output root; each stage writes a subdirectory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-run stages even when their manifests are current.
    #[arg(long, global = true)]
    force: bool,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Args, Default)]
struct CorpusArgs {
    /// Documents, JSON Lines.
    #[arg(long)]
    documents: Option<PathBuf>,
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// `TYPE<tab>term` lines.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter the corpus and write the requested text variants.
    Anonymize {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Score every variant text with the requested prompts.
    Extract {
        /// Comma-separated measures: sentiment, uncertainty, investment, economy.
        #[arg(long, alias = "measures")]
        prompts: Option<String>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Ask the model to name the firm and year behind each variant text.
    Recognize {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Join signals to the panel and run the regression batteries.
    Evaluate {
        #[arg(long)]
        panel: Option<PathBuf>,
        /// Comma-separated batteries; all by default.
        #[arg(long)]
        batteries: Option<String>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Render tables and delimited files from the evaluation.
    Report {
        #[arg(long)]
        batteries: Option<String>,
    },
    /// All stages in order.
    Run {
        #[arg(long, alias = "measures")]
        prompts: Option<String>,
        #[arg(long)]
        panel: Option<PathBuf>,
        #[arg(long)]
        batteries: Option<String>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Write a seeded synthetic corpus, panel and mock-model config.
    Synth {
        #[arg(long, default_value_t = 5)]
        firms: usize,
        #[arg(long, default_value_t = 4)]
        slots: usize,
        #[arg(long, default_value_t = 2.0)]
        signal_to_noise: f64,
        #[arg(long, default_value_t = 0)]
        headlines_per_transcript: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Ingestion { .. } | Error::Json(_) | Error::Csv(_) => 3,
        Error::ProviderAuth(_) => 4,
        Error::Config(_) => 5,
        _ => 1,
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn overrides(global: &GlobalArgs, command: &Command) -> Overrides {
    let mut o = Overrides {
        out: global.out.clone(),
        jobs: global.jobs,
        seed: global.seed,
        provider: global.provider.clone(),
        categories: global.categories.clone(),
        variants: global.variants.clone(),
        ..Default::default()
    };
    let mut corpus = |c: &CorpusArgs| {
        o.documents = c.documents.clone();
        o.calendar = c.calendar.clone();
        o.gazetteer = c.gazetteer.clone();
    };
    match command {
        Command::Anonymize { corpus: c } | Command::Recognize { corpus: c } => corpus(c),
        Command::Extract { prompts, corpus: c } => {
            corpus(c);
            o.measures = prompts.clone();
        }
        Command::Evaluate { panel, batteries, corpus: c } => {
            corpus(c);
            o.panel = panel.clone();
            o.batteries = batteries.clone();
        }
        Command::Run { prompts, panel, batteries, corpus: c } => {
            corpus(c);
            o.measures = prompts.clone();
            o.panel = panel.clone();
            o.batteries = batteries.clone();
        }
        Command::Report { batteries } => o.batteries = batteries.clone(),
        Command::Synth { .. } => {}
    }
    o
}

fn run(cli: Cli) -> anonloss::Result<()> {
    if let Command::Synth { firms, slots, signal_to_noise, headlines_per_transcript } = cli.command {
        let config = SyntheticConfig {
            seed: cli.global.seed.unwrap_or(SyntheticConfig::default().seed),
            firms,
            slots,
            signal_to_noise,
            headlines_per_transcript,
            ..Default::default()
        };
        let out = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
        return stages::synth(&out, &config);
    }
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(file, overrides(&cli.global, &cli.command))?;
    let mut runner = Runner::new(settings, cli.global.force);
    match cli.command {
        Command::Anonymize { .. } => runner.anonymize(),
        Command::Extract { .. } => runner.extract(),
        Command::Recognize { .. } => runner.recognize(),
        Command::Evaluate { .. } => runner.evaluate(),
        Command::Report { .. } => runner.report(),
        Command::Run { .. } => runner.run_all(),
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return fail("usage", e.to_string().trim(), 2),
        Err(e) => {
            // help and version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), exit_code(&e)),
    }
}
