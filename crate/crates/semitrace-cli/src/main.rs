mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::Config;
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Model trace-formula experiments driven by a flat JSON config.
#[derive(Debug, Parser)]
#[command(name = "semitrace", version)]
struct Cli {
    /// One of: classify, spectrum, heat, bnf, trace-check, eta.
    #[arg(value_parser = commands::COMMANDS)]
    command: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, env = "SEMITRACE_THREADS")]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> Result<PathBuf, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::io(&cli.config, e))?;
    let cfg = Config::parse(&text)?;
    if let Some(c) = cfg.command() {
        if c != cli.command {
            return Err(cfg.error("command", format!("config is for `{c}`, invoked as `{}`", cli.command)));
        }
    }
    let report = commands::run(&cli.command, &cfg)?;
    let (bytes, ext) = match cli.format {
        Format::Json => (output::to_json(&report.json), "json"),
        Format::Csv => (report.table.to_csv()?, "csv"),
    };
    let path = cli.out.join(format!("{}.{ext}", cli.command));
    output::write_atomic(&path, &bytes)?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            match cli.format {
                Format::Json => print!("{}", String::from_utf8_lossy(&output::to_json(&e.to_json()))),
                Format::Csv => eprintln!("error[{}]: {e}", e.code()),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
