use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epcontact::{presets, scenario, suites, Error};

/// Peakon solutions on contact manifolds: run scenarios and verification suites.
#[derive(Parser)]
#[command(name = "epcontact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a JSON scenario and write trajectory and summary files.
    Run {
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run named verification suites ("all" for every suite).
    Verify {
        suites: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Preset initial conditions.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

// exit codes
const VERIFY_FAILED: u8 = 1;
const USAGE: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    match e.code() {
        "schema" | "unknown_preset" | "unknown_suite" | "invalid_config" | "invalid_parameter" | "dimension_mismatch" => 3,
        "model_exit" => 4,
        "divergence" | "step_underflow" | "singular_system" => 5,
        "io" => 6,
        _ => 7,
    }
}

fn fail(e: &Error) -> ExitCode {
    let msg = serde_json::json!({ "error": e.code(), "message": e.to_string() });
    eprintln!("{msg}");
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from("."));
            match scenario::run_file(&config, &out) {
                Ok(outcome) => {
                    println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
                    if outcome.verified {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(VERIFY_FAILED)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify { suites: names, seed, report } => {
            if names.is_empty() {
                eprintln!("usage: epcontact verify <suite|all>... [--seed S] [--report FILE]");
                eprintln!("suites: {}", suites::SUITE_NAMES.join(", "));
                return ExitCode::from(USAGE);
            }
            let (json, pass) = match suites::run_suites(&names, seed).and_then(|r| Ok((r.to_json()?, r.pass))) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            match report {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &json) {
                        return fail(&Error::Io(e));
                    }
                }
                None => print!("{json}"),
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VERIFY_FAILED)
            }
        }
        Command::Presets { action: PresetAction::List } => {
            for name in presets::PRESET_NAMES {
                println!("{name:18} {}", presets::describe(name).unwrap_or(""));
            }
            ExitCode::SUCCESS
        }
    }
}
