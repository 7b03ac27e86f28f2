use std::path::PathBuf;

use clap::{Parser, Subcommand};

use remstab::cli::{analyze, Overrides};

#[derive(Parser)]
#[command(name = "remstab", version, about = "Stability analysis of relative equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses described by a configuration file.
    Analyze {
        config: PathBuf,
        /// Write the JSON report array here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the text summary here instead of stdout.
        #[arg(long)]
        text: Option<PathBuf>,
        /// Also run the phase-space oracle.
        #[arg(long)]
        oracle: bool,
        /// Also run the block test and its cross-checks.
        #[arg(long)]
        blocks: bool,
        /// Relative definiteness tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze {
            config,
            json,
            text,
            oracle,
            blocks,
            tol,
        } => analyze(
            &config,
            &Overrides {
                json,
                text,
                oracle,
                blocks,
                tol,
            },
        ),
    };
    std::process::exit(code);
}
