use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ligep_bench::config::parse_ranks;
use ligep_bench::plots::write_plot_scripts;
use ligep_bench::{execute, BenchError, ConfigError, ExperimentConfig, Stage};

/// Runs the LIGEP full- and reduced-order experiments.
#[derive(Debug, Parser)]
#[command(name = "ligep-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact directory; defaults to `output_dir` from the config, then `out/<model>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated ranks overriding the config, e.g. `20,50`.
    #[arg(long, global = true)]
    ranks: Option<String>,

    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full-order run and POD bases.
    Fom,
    /// Full-order run, bases and all reduced runs.
    Rom,
    /// Plot scripts for an existing artifact directory.
    Compare,
    /// Everything: `rom` followed by `compare`.
    All,
}

fn run(cli: Cli) -> Result<i32, BenchError> {
    let quiet = cli.quiet;
    let progress = move |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };

    let stage = match cli.command {
        Command::Fom => Stage::Fom,
        Command::Rom => Stage::Rom,
        Command::All => Stage::All,
        Command::Compare => {
            let out = cli.out.ok_or(ConfigError::Missing("--out"))?;
            let scripts = write_plot_scripts(&out)?;
            progress(&format!("{} plot scripts written to {}", scripts.len(), out.display()));
            return Ok(0);
        }
    };

    let path = cli.config.ok_or(ConfigError::Missing("--config"))?;
    let mut config = ExperimentConfig::from_file(&path)?;
    if let Some(ranks) = &cli.ranks {
        config.ranks = parse_ranks(ranks)?;
        config.validate()?;
    }
    let out = cli
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(config.model.name()));
    let manifest = execute(stage, &config, &out, &progress)?;
    let failed: Vec<_> = manifest.failed_runs().collect();
    for r in &failed {
        eprintln!("{} r = {} failed: {}", r.method, r.rank, r.failure.as_deref().unwrap_or_default());
    }
    progress(&format!("artifacts written to {}", out.display()));
    Ok(if failed.is_empty() { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
