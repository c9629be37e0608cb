use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gaudin_forge::abel::FlowMode;
use gaudin_forge::config::{issues_to_error, parse_config};
use gaudin_forge::run::{error_json, run, write_error, Overrides};
use gaudin_forge::Error;

/// Run one Richardson–Gaudin task described by a TOML config.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Path to the run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random states and demos.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration / solver tolerance (overrides the config).
    #[arg(long)]
    tol: Option<f64>,
    /// Flow mode for the theta-flow task.
    #[arg(long, value_parser = ["paper", "calibrated"])]
    mode: Option<String>,
}

fn fail(out: &Option<PathBuf>, err: &Error) -> ExitCode {
    match out {
        Some(dir) => {
            if let Err(e) = write_error(dir, None, err, None) {
                eprintln!("could not write error record: {e}");
            }
        }
        None => println!("{}", error_json(None, err, None)),
    }
    eprintln!("error: {err}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return fail(&cli.out, &Error::Io(format!("{}: {e}", cli.config.display()))),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(issues) => {
            for i in &issues {
                eprintln!("config: {i}");
            }
            return fail(&cli.out, &issues_to_error(&issues));
        }
    };
    let mode = match cli.mode.as_deref().map(str::parse::<FlowMode>).transpose() {
        Ok(m) => m,
        Err(e) => return fail(&cli.out, &e),
    };
    let overrides = Overrides { out: cli.out.clone(), seed: cli.seed, tol: cli.tol, mode };
    if let Err(e) = cfg.apply(&overrides) {
        return fail(&cli.out, &e);
    }
    match run(&cfg, cli.tol) {
        Ok(entries) => {
            for e in entries {
                println!("{}  {}", e.sha256, e.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
