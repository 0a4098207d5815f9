use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rqscore::pipeline::{self, RunConfig};

#[derive(Parser)]
#[command(name = "rqscore", version, about = "Score research articles with a chat model and compare against proxy scores")]
struct Cli {
    /// Run config (TOML).
    #[arg(long, short, global = true, default_value = "rqscore.toml")]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the built-in deterministic scorer instead of the endpoint.
    #[arg(long, global = true)]
    mock: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, filter and persist the corpus.
    Ingest,
    /// Score every article, resuming from stored reports.
    Score,
    /// Extract scores and compute correlations and curves.
    Analyze,
    /// Tabulate report structure.
    Structure {
        /// Pattern spec file (CSV or JSONL).
        #[arg(long)]
        specs: Option<PathBuf>,
    },
    /// ingest, score, analyze and structure in sequence.
    All,
}

fn run(cli: Cli) -> Result<(), pipeline::PipelineError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.mock_endpoint |= cli.mock;
    match cli.command {
        Command::Ingest => println!("{}", pipeline::cmd_ingest(&cfg)?),
        Command::Score => {
            pipeline::cmd_score(&cfg)?;
        }
        Command::Analyze => println!("{}", pipeline::cmd_analyze(&cfg)?),
        Command::Structure { specs } => {
            println!("{}", pipeline::cmd_structure(&cfg, specs.as_deref())?)
        }
        Command::All => {
            pipeline::cmd_all(&cfg)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
