use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lzero_cli::config::Config;
use lzero_cli::{exit_code, run, Command, Invocation, Outcome};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Coeffs,
    Eval,
    Ortho,
    Witness,
    Zeros,
    Density,
    Selftest,
}

/// Zeros of polynomial combinations of L-functions in Re(s) > 1.
#[derive(Parser, Debug)]
#[command(name = "lzero", version)]
struct Args {
    /// Command to run.
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment config (`key = value` lines under `[section]` headers).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Seed overriding the config `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path overriding the section `output` (`-` for stdout).
    #[arg(short, long)]
    output: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Coeffs => Command::Coeffs,
        Cmd::Eval => Command::Eval,
        Cmd::Ortho => Command::Ortho,
        Cmd::Witness => Command::Witness,
        Cmd::Zeros => Command::Zeros,
        Cmd::Density => Command::Density,
        Cmd::Selftest => Command::Selftest,
    };
    let (text, base_dir) = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => (t, path.parent().map(PathBuf::from).unwrap_or_default()),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => (String::new(), PathBuf::from(".")),
    };
    let result = Config::parse(&text).and_then(|config| {
        let inv = Invocation { command, config, base_dir, seed: args.seed, output: args.output };
        run(&inv)
    });
    match &result {
        Ok(Outcome::Done) => {}
        Ok(Outcome::Inconclusive(why)) => eprintln!("inconclusive: {why}"),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
