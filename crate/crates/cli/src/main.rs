use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

/// Exact scheduling analysis for half-duplex diamond relay networks.
#[derive(Debug, Parser)]
#[command(name = "relay-sched", version)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct Flags {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Append a decimal rendering next to exact fractions.
    #[arg(long, global = true)]
    pub float: bool,
    /// Use the exact LP oracle even when the closed form applies.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Analyse single-receiver schedules instead of single-transmitter ones.
    #[arg(long, global = true)]
    pub dual: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the sufficient optimality conditions hold.
    Check { network: PathBuf },
    /// Print the approximate capacity as an exact fraction.
    Capacity { network: PathBuf },
    /// Print an optimal schedule.
    Schedule { network: PathBuf },
    /// Run the property battery on one network.
    Verify { network: PathBuf },
    /// Analyse many seeded random networks.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_cap: u32,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw networks without relay-to-relay links.
        #[arg(long)]
        no_relay_links: bool,
        /// Record file; records go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to jsonl for `.jsonl` paths and csv otherwise.
        #[arg(long, value_enum)]
        format: Option<SweepFormat>,
        /// Where to write the offending network on a mismatch.
        #[arg(long)]
        repro: Option<PathBuf>,
    },
    /// Print a transfer matrix and its GF(2) rank.
    Rank {
        network: PathBuf,
        /// Relays on the source side, 1-based and comma separated.
        #[arg(long, default_value = "")]
        omega: String,
        /// Transmitting relays, 1-based and comma separated.
        #[arg(long, default_value = "")]
        state: String,
    },
    /// Generate a random network document.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_cap: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = cli.flags;
    let result = match cli.command {
        Command::Check { network } => commands::check(&network, flags),
        Command::Capacity { network } => commands::capacity(&network, flags),
        Command::Schedule { network } => commands::schedule(&network, flags),
        Command::Verify { network } => commands::verify(&network, flags),
        Command::Sweep {
            n,
            max_cap,
            count,
            seed,
            no_relay_links,
            out,
            format,
            repro,
        } => commands::sweep(
            commands::SweepArgs {
                n,
                max_cap,
                count,
                seed,
                relay_links: !no_relay_links,
                out,
                format,
                repro,
            },
            flags,
        ),
        Command::Rank {
            network,
            omega,
            state,
        } => commands::rank(&network, &omega, &state, flags),
        Command::Gen {
            n,
            max_cap,
            seed,
            out,
        } => commands::gen(n, max_cap, seed, out.as_deref()),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
