use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paradiff_cli::{run_file, to_jsonl, Options};

#[derive(Parser)]
#[command(name = "paradiff", version, about = "Run paradiff session files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every command of a session file and emit certificates.
    Run {
        file: PathBuf,
        /// Write certificates here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Default degree bound for `horizontal`.
        #[arg(long)]
        degree_bound: Option<u32>,
        /// Default prolongation depth for `closure`.
        #[arg(long)]
        depth: Option<usize>,
        /// Default rank cap for `closure`.
        #[arg(long)]
        rank_cap: Option<usize>,
        /// Suppress the human-readable report on standard error.
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        file,
        out,
        degree_bound,
        depth,
        rank_cap,
        quiet,
    } = Cli::parse().command;
    let opts = Options {
        degree_bound,
        depth,
        rank_cap,
    };
    let result = run_file(&file, &opts);
    if !quiet {
        for line in &result.report {
            eprintln!("{line}");
        }
    }
    let text = to_jsonl(&result.certificates);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("cannot write `{}`: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(result.exit_code() as u8)
}
