use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sparse_rank_cli::{commands, output, Command, ExperimentConfig, Params};

/// Seeded experiments on sparse random 0/1 matrices.
#[derive(Parser)]
#[command(name = "sparse-rank", version)]
struct Cli {
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let file = match &cli.config {
        Some(path) => match Params::from_file(path) {
            Ok(p) => p,
            Err(e) => return usage(format!("{e:#}")),
        },
        None => Params::default(),
    };
    let params = cli.params.overlay(file);
    let Some(command) = cli.command.or(params.command) else {
        return usage("no command given on the command line or in the config file");
    };
    let config = match ExperimentConfig::resolve(command, params) {
        Ok(c) => c,
        Err(e) => return usage(format!("{e:#}")),
    };
    let outcome = match commands::run(&config) {
        Ok(o) => o,
        Err(e) => return usage(format!("{e:#}")),
    };
    let written = match &config.out {
        Some(path) => File::create(path)
            .map_err(anyhow::Error::from)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                output::write(&mut w, &config, &outcome)?;
                Ok(w.flush()?)
            }),
        None => {
            let mut w = io::stdout().lock();
            output::write(&mut w, &config, &outcome)
        }
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
