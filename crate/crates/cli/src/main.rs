//! `packdim`: build fixtures, estimate dimensions, compute Ξ and transport
//! exponents, and run the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Flags};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] packdim::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "packdim",
    version,
    about = "Packing-dimension experiments on atomic measures and limit-periodic operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a fixture measure as CSV.
    Measure {
        /// atom | uniform | cantor | spectral[:free|period2|trap|canonical|<spec file>]
        fixture: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Generalized dimensions, the esssup proxy and box dimension of a fixture or CSV measure.
    Dims {
        /// atom | uniform | cantor | spectral[:...] | csv
        fixture: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Ξ on a geometric time grid with its growth exponent.
    Xi {
        fixture: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Abel-averaged moments and transport exponents of a wave packet started at site 0.
    Transport {
        /// free | period2 | trap | canonical, or use --spec
        #[arg(value_name = "OPERATOR")]
        name: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run the verification suite and write a JSON report.
    Verify {
        #[command(flatten)]
        flags: Flags,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, fixture, flags) = match cli.command {
        Command::Measure { fixture, flags } => ("measure", fixture, flags),
        Command::Dims { fixture, flags } => ("dims", fixture, flags),
        Command::Xi { fixture, flags } => ("xi", fixture, flags),
        Command::Transport { name, flags } => ("transport", name, flags),
        Command::Verify { flags } => ("verify", None, flags),
    };
    let cfg = ExperimentConfig::resolve(fixture, &flags)?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match name {
        "measure" => commands::measure(&cfg),
        "dims" => commands::dims(&cfg),
        "xi" => commands::xi(&cfg),
        "transport" => commands::transport(&cfg),
        _ => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("packdim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
