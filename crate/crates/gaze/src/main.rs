use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gaze::canonical::write_atomic;
use gaze::interchange::{parse_annotation_document, to_json};
use gaze::pipeline::{run_aggregate, run_analyze, AggregateError, ConfigError, RunConfig};
use gaze_core::boilerplate::strip_boilerplate;
use gaze_core::embeddings::FinetuneConfig;
use gaze_core::ledger::DEFAULT_MIN_MENTIONS;
use gaze_core::toy::toy_annotate;

const EXIT_DOC_FAILURES: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "gaze", version, about = "Measure agency and appearance bias in annotated fiction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze every annotation file in a directory.
    Analyze(AnalyzeArgs),
    /// Summarize per-document reports across the corpus.
    Aggregate {
        /// Report files or directories holding `*.report.json`.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "summary")]
        out: PathBuf,
    },
    /// Annotate text in the toy grammar and write annotation JSON.
    ToyAnnotate {
        input: PathBuf,
        #[arg(long)]
        doc_id: Option<String>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove Project Gutenberg header and footer.
    StripBoilerplate {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check annotation files against the interchange schema.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Pretrained vectors in GloVe text format.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Directory with appearance.txt and optional male.txt / female.txt.
    #[arg(long)]
    wordsets: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_MENTIONS)]
    min_mentions: usize,
    /// Vector dimension when --vectors is not given.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    no_vectors: bool,
}

impl AnalyzeArgs {
    fn run_config(self) -> RunConfig {
        RunConfig {
            annotations: self.annotations,
            metadata: self.metadata,
            vectors: self.vectors,
            wordsets: self.wordsets,
            finetune: FinetuneConfig {
                window: self.window,
                negatives: self.negatives,
                initial_lr: self.lr,
                final_lr: self.lr * 1e-4,
                total_steps: self.steps,
                seed: self.seed,
                ..FinetuneConfig::default()
            },
            dim: self.dim,
            min_mentions: self.min_mentions,
            out: self.out,
            jobs: self.jobs,
            save_vectors: !self.no_vectors,
        }
    }
}

fn emit(out: Option<PathBuf>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(&p, body.as_bytes()).with_context(|| p.display().to_string()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = args.run_config();
            match run_analyze(&cfg) {
                Ok(outcome) => {
                    eprintln!(
                        "{} analyzed, {} failed",
                        outcome.succeeded.len(),
                        outcome.failures.len()
                    );
                    if outcome.all_failed() {
                        return Ok(ExitCode::from(EXIT_DOC_FAILURES));
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e @ (ConfigError::Output { .. } | ConfigError::Pool(_))) => Err(e.into()),
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(EXIT_CONFIG))
                }
            }
        }
        Command::Aggregate { inputs, out } => match run_aggregate(&inputs, &out) {
            Ok(summary) => {
                let overall = summary.groups.first().map(|g| g.objectification);
                eprintln!("overall objectification: {}", overall.unwrap_or(false));
                Ok(ExitCode::SUCCESS)
            }
            Err(e @ AggregateError::NoReports) => {
                eprintln!("error: {e}");
                Ok(ExitCode::from(EXIT_CONFIG))
            }
            Err(e) => Err(e.into()),
        },
        Command::ToyAnnotate { input, doc_id, out } => {
            let text = fs::read_to_string(&input).with_context(|| input.display().to_string())?;
            let id = doc_id.unwrap_or_else(|| {
                input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "doc".into())
            });
            let doc = toy_annotate(&id, &text)?;
            emit(out, &to_json(&doc))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::StripBoilerplate { input, out } => {
            let text = fs::read_to_string(&input).with_context(|| input.display().to_string())?;
            emit(out, strip_boilerplate(&text))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { files } => {
            let mut bad = 0;
            for f in &files {
                let result = fs::read(f)
                    .map_err(anyhow::Error::from)
                    .and_then(|b| parse_annotation_document(&b).map_err(Into::into));
                match result {
                    Ok(doc) => println!("ok {} ({})", f.display(), doc.doc_id()),
                    Err(e) => {
                        bad += 1;
                        println!("invalid {}: {e}", f.display());
                    }
                }
            }
            Ok(if bad == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_DOC_FAILURES)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAZE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DOC_FAILURES)
        }
    }
}
