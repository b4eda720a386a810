//! `tdp`: file-mediated key agreement, conjugation encryption and the
//! accompanying counting and analysis reports.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad flags / invalid parameters /
//! role mismatch / search bound, 3 malformed input file, 4 parameter mismatch
//! between inputs, 5 ciphertext does not decode under the given key.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Format;
use tdp_core::Role;

#[derive(Debug, Parser)]
#[command(
    name = "tdp",
    version,
    about = "Triple decomposition key agreement over GL(d, F_p)"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Field characteristic (default 251)
    #[arg(long, global = true)]
    pub prime: Option<u32>,
    /// Matrix dimension (default 8)
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Seed for the deterministic generator; drawn from the OS when absent
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Alice,
    Bob,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::Alice => Role::Alice,
            RoleArg::Bob => Role::Bob,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group, polynomial and keyspace counts for the parameters
    Params,
    /// Draw the four public bases
    Setup {
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a private key on a public setup
    Keygen {
        #[arg(long, value_enum)]
        role: RoleArg,
        /// Setup file
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive the public token from a private key
    Token {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine a private key with the peer's token into the session key
    Shared {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        peer: PathBuf,
        /// Expected role of the private key
        #[arg(long, value_enum)]
        role: Option<RoleArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file under a session key
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file under a session key
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run many sessions and report agreement, timing and ciphertext statistics
    Stats {
        #[arg(long, default_value_t = 1000)]
        sessions: u64,
    },
    /// Exhaustive pseudo-key recovery on a generated toy session
    Attack,
    /// Random monic irreducible polynomial and its companion matrix
    Irreducible {
        /// Polynomial degree (defaults to --dim)
        #[arg(long)]
        degree: Option<usize>,
    },
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<tdp_core::Error> for Failure {
    fn from(e: tdp_core::Error) -> Self {
        use tdp_core::Error as E;
        let code = match &e {
            E::Format(_) | E::Framing { .. } => 3,
            E::ParamsMismatch => 4,
            E::ValueOutOfRange => 5,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
