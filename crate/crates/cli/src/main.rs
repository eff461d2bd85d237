use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use char2alg::VerifyLevel;
use char2alg_cli::{execute, parse, Options, Status};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Level {
    Fast,
    Full,
}

/// Analyze algebras with involution in characteristic two.
#[derive(Debug, Parser)]
#[command(name = "char2alg", version)]
struct Args {
    /// Job file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override every scramble seed and seed the random searches.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "full")]
    verify_level: Level,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(Status::Input as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.input {
        Some(p) => match fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => return fail(format!("{}: {e}", p.display())),
        },
        None => {
            let mut t = String::new();
            if let Err(e) = io::stdin().read_to_string(&mut t) {
                return fail(e);
            }
            t
        }
    };
    let spec = match parse(&text) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let level = match args.verify_level {
        Level::Fast => VerifyLevel::Fast,
        Level::Full => VerifyLevel::Full,
    };
    let outcome = match execute(&spec, Options { level, seed: args.seed }) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let mut doc = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    doc.push('\n');
    let written = match &args.output {
        Some(p) => fs::write(p, doc),
        None => io::stdout().write_all(doc.as_bytes()),
    };
    if let Err(e) = written {
        return fail(e);
    }
    ExitCode::from(outcome.status as u8)
}
