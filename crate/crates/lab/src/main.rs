use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use qrcsl_lab::config::{parse_config, Format, RunConfig, Subcommand};
use qrcsl_lab::error::{LabError, EXIT_CONFIG};
use qrcsl_lab::output::write_atomic;
use qrcsl_lab::parallel::threads_from_env;

/// Collapse-model laboratory. Runs the subcommand named in the config file.
#[derive(Debug, Parser)]
#[command(name = "qrcsl", version)]
struct Cli {
    /// Config file (key = value lines with [section] headers). Defaults
    /// apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the subcommand named in the config.
    #[arg(long, value_parser = parse_subcommand)]
    subcommand: Option<Subcommand>,

    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,

    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,

    /// Record elapsed seconds in the JSON envelope. Off by default because
    /// it makes reruns differ.
    #[arg(long)]
    wall_time: bool,
}

fn parse_subcommand(s: &str) -> Result<Subcommand, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn load(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path.display().to_string(), e))?;
            parse_config(&text).map_err(LabError::Config)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.subcommand {
        config.subcommand = s;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.path = Some(out.display().to_string());
    }
    if let Some(f) = cli.format {
        config.output.format = f;
    }
    Ok(config)
}

fn main_inner(cli: &Cli) -> Result<i32, LabError> {
    let config = load(cli)?;
    let threads = threads_from_env()?;
    let start = Instant::now();
    let mut outcome = qrcsl_lab::execute(&config, threads)?;
    if cli.wall_time {
        outcome.envelope.wall_time = Some(start.elapsed().as_secs_f64());
    }
    let text = outcome.envelope.render(config.output.format);
    match &config.output.path {
        Some(path) => write_atomic(std::path::Path::new(path), &text)?,
        None => print!("{text}"),
    }
    if !cli.quiet {
        eprintln!(
            "qrcsl {}: {} records, {} rows, exit {}",
            config.subcommand,
            outcome.envelope.records.len(),
            outcome.envelope.table.rows.len(),
            outcome.exit_code
        );
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // help and version requests are not failures
            return if err.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{}", err.to_record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
