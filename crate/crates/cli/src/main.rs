use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "twotier", version, about = "Union codes and two-tier decoding for random linear network coding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the union code and check its distance and size claims.
    VerifyLemmas(Common),
    /// Encode one message.
    Encode {
        #[command(flatten)]
        common: Common,
        /// Message entries, comma separated (e.g. "g^3,0").
        #[arg(long)]
        message: Option<String>,
    },
    /// Run two-tier decoding on a packet file.
    Decode {
        #[command(flatten)]
        common: Common,
        /// One packet per line as a digit string; blank lines and lines
        /// starting with '#' are skipped.
        #[arg(long)]
        packets: PathBuf,
    },
    /// Run the network simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Component and union minimum distances.
    AnalyzeDistances(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Packets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::VerifyLemmas(c) => commands::verify_lemmas(&c),
        Command::Encode { common, message } => commands::encode(&common, message.as_deref()),
        Command::Decode { common, packets } => commands::decode(&common, &packets),
        Command::Simulate { common, trials } => commands::simulate(&common, trials),
        Command::AnalyzeDistances(c) => commands::analyze_distances(&c),
    };
    ExitCode::from(status)
}
