mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::Failure;

const EXIT_CONFIG: u8 = 64;
const EXIT_RUNTIME: u8 = 70;

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("LEMLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| format!("LEMLAB_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn diagnostic(kind: &str, message: &str) {
    eprintln!("{}", json!({ "status": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG),
            };
        }
    };
    if let Err(message) = configure_threads() {
        diagnostic("config_error", &message);
        return ExitCode::from(EXIT_CONFIG);
    }

    let outcome = match &cli.command {
        Command::Length(a) => commands::length(a),
        Command::Trace(a) => commands::trace(a),
        Command::PsiMap { poly, resolution } => commands::psi_map(poly, *resolution),
        Command::Area(a) => commands::area_cmd(a),
        Command::Laurent { poly, terms } => commands::laurent(poly, *terms),
        Command::Verify { battery, common } => commands::verify(*battery, common),
        Command::Search {
            n,
            restarts,
            directions,
            common,
        } => commands::search_cmd(*n, *restarts, *directions, common),
        Command::Families { family, n, a, r, common } => commands::families(*family, *n, *a, *r, common),
    };

    match outcome {
        Ok((out, config, code)) => match out.finish(&config) {
            Ok(_) => ExitCode::from(code as u8),
            Err(e) => {
                diagnostic("runtime_failure", &format!("writing outputs: {e}"));
                ExitCode::from(EXIT_RUNTIME)
            }
        },
        Err(Failure::Config(message)) => {
            diagnostic("config_error", &message);
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            diagnostic("runtime_failure", &format!("{e} ({e:?})"));
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
