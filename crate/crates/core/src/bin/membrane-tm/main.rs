//! Command-line front end.
//!
//! Exit status: 0 accept or verified, 1 reject, 2 mismatch or contract
//! violation, 3 usage or parse error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
    CsvTrace,
}

#[derive(Debug, Parser)]
#[command(name = "membrane-tm", version, about = "Compile Turing machines into shallow P systems and check them")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the machine directly and print its verdict and trace.
    RunTm { tm: PathBuf, input: String },
    /// Print the family member for inputs of length N as JSON.
    Compile {
        tm: PathBuf,
        #[arg(short)]
        n: usize,
    },
    /// Print the input multiset for a word.
    Encode { tm: PathBuf, input: String },
    /// Compile, add the input and run the P system to its verdict.
    Simulate {
        tm: PathBuf,
        input: String,
        /// Write a per-step CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Compare a deterministic machine with its compiled system step by step.
    Verify {
        tm: PathBuf,
        input: String,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Explore every branch of a compiled nondeterministic machine.
    VerifyNd {
        tm: PathBuf,
        input: String,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1 << 12)]
        branch_bound: u128,
    },
    /// Verify random machines shaped like the template (its alphabet and
    /// state count).
    Fuzz {
        template: PathBuf,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Generate forking machines and use verify-nd.
        #[arg(long)]
        nd: bool,
    },
    /// Label and rule counts of the family member for length N.
    Stats {
        tm: PathBuf,
        #[arg(short)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    match commands::run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
