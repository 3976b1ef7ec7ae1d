use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nilfix_cli::config::{ExperimentConfig, Kind};
use nilfix_cli::{report, CliError, EXIT_CHECK_FAILED, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "nilfix", version, about = "Fixed-point experiments for nilpotent groups of plane maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Summarize the certificate in a run directory.
    Report { dir: PathBuf },
    /// Print an example config for an experiment kind.
    Schema { kind: String },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = nilfix_cli::configure_threads() {
        return fail(e);
    }
    match cli.command {
        Command::Run { config } => match nilfix_cli::run_file(&config) {
            Ok(out) => {
                for c in &out.checks {
                    println!("{}", c.summary());
                }
                for p in &out.written {
                    println!("wrote {}", p.display());
                }
                ExitCode::from(out.exit_code() as u8)
            }
            Err(e) => fail(e),
        },
        Command::Report { dir } => match report::load(&dir) {
            Ok(cert) => {
                print!("{}", report::summarize(&cert));
                if cert.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_CHECK_FAILED as u8)
                }
            }
            Err(e) => fail(e),
        },
        Command::Schema { kind } => match Kind::parse(&kind) {
            Some(k) => {
                let cfg = ExperimentConfig::example(k);
                println!("{}", serde_json::to_string_pretty(&cfg).expect("config serialises"));
                ExitCode::SUCCESS
            }
            None => {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                fail(CliError::ConfigInvalid {
                    path: "kind".into(),
                    message: format!("unknown kind {kind:?}; expected one of {}", names.join(", ")),
                })
            }
        },
    }
}
