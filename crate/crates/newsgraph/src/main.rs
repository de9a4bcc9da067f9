//! Thin command-line front end over [`newsgraph::pipeline`]. All real work
//! lives in the library; this file only parses arguments, assembles the run
//! configuration, and maps failures onto exit codes (1 usage or config,
//! 2 bad data, 3 internal).

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use newsgraph::config::{load_config, RunConfig};
use newsgraph::pipeline::{run, Command};

#[derive(Parser)]
#[command(
    name = "newsgraph",
    about = "Knowledge-graph based fake news detection pipeline",
    version
)]
struct Cli {
    /// Configuration file (flat key=value, or .json)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root random seed, overriding the config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Artifact directory, overriding the config file
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Extra key=value override, applied after the config file; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: CliCommand,
}

#[derive(clap::Subcommand)]
enum CliCommand {
    /// Extract subject-predicate-object triples from the corpus
    Extract,
    /// Build the global knowledge graph and per-item subgraphs
    BuildKg,
    /// Train the structure classifier and emit knowledge embeddings
    TrainKb,
    /// Train the translation-embedding bias baseline
    TrainTranse,
    /// Train the multimodal fusion classifier and predict the test split
    Fuse,
    /// Run the full configuration-by-metric evaluation matrix
    Evaluate,
    /// Bucket test predictions by weeks since the last training item
    TimeSensitivity,
    /// Generate a synthetic labelled corpus
    Synth,
}

impl From<&CliCommand> for Command {
    fn from(c: &CliCommand) -> Command {
        match c {
            CliCommand::Extract => Command::Extract,
            CliCommand::BuildKg => Command::BuildKg,
            CliCommand::TrainKb => Command::TrainKb,
            CliCommand::TrainTranse => Command::TrainTranse,
            CliCommand::Fuse => Command::Fuse,
            CliCommand::Evaluate => Command::Evaluate,
            CliCommand::TimeSensitivity => Command::TimeSensitivity,
            CliCommand::Synth => Command::Synth,
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut config = match &cli.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.display().to_string();
    }
    for entry in &cli.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got '{entry}'"))?;
        config
            .set(key.trim(), value.trim())
            .map_err(|e| e.to_string())?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 by default, which this tool reserves for data
            // errors; keep usage problems on 1 and help/version on 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let config = match build_config(&cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };

    match run(Command::from(&cli.command), &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
