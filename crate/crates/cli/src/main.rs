use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod failure;
mod render;

use failure::Failure;

/// Champion-challenger replay for probability-of-default models.
#[derive(Debug, Parser)]
#[command(name = "vintage", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the configured synthetic dataset as CSV.
    Generate(Common),
    /// Run the replay into an empty store and write the period reports.
    Replay(Common),
    /// Render candidate-by-period matrices from a populated store.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Delimited,
    Table,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::new("invalid-threads", e.to_string()))?;
    }
    match cli.command {
        Command::Generate(c) => commands::generate(&c.config, c.out.as_deref()),
        Command::Replay(c) => commands::replay(&c.config, c.out.as_deref()),
        Command::Report { common, format } => commands::report(&common.config, common.out.as_deref(), format),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_ansi(std::io::stderr().is_terminal())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let f = failure::classify(e);
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
