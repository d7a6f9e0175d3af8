mod commands;
mod config;
mod error;
mod report;
mod verify;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{OutputFormat, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "subcarve",
    version,
    about = "Operational subsystems of finite-dimensional quantum systems"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Equality tolerance on max-abs entry differences.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-10)]
    rank_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Longest degradation chain searched.
    #[arg(long = "max-chain", global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_chain: u64,
    /// Longest word over the generators.
    #[arg(long = "max-words", global = true, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    max_words: u64,
    /// Largest finite group closed from generators.
    #[arg(long = "max-order", global = true, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
    max_order: u64,
}

#[derive(Args)]
struct InputArg {
    /// JSON input file; stdin when omitted or `-`.
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Wedderburn decomposition of a generated *-algebra.
    Decompose(InputArg),
    /// Carve the subsystem of an agent.
    Carve(InputArg),
    /// Coherence classification of a channel monoid.
    Classify(InputArg),
    /// Isotypic decomposition and adversarial group of a finite group representation.
    Grouprep(InputArg),
    /// Purify block-reduced states.
    Purify {
        #[command(flatten)]
        input: InputArg,
        /// Also connect to a second purification of the same reduced state.
        #[arg(long)]
        connect: bool,
    },
    /// Run the property suite.
    Verify {
        /// Run only the named checks.
        #[arg(long, value_name = "CHECK")]
        only: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(error::EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let g = &cli.global;
    let cfg = RunConfig::new(
        g.tol,
        g.rank_tol,
        g.seed,
        g.max_chain,
        g.max_words,
        g.max_order,
    )?;
    let (name, outcome) = match &cli.command {
        Command::Decompose(i) => ("decompose", commands::decompose(&read_input(i)?, &cfg)?),
        Command::Carve(i) => ("carve", commands::carve(&read_input(i)?, &cfg)?),
        Command::Classify(i) => ("classify", commands::classify(&read_input(i)?, &cfg)?),
        Command::Grouprep(i) => ("grouprep", commands::grouprep(&read_input(i)?, &cfg)?),
        Command::Purify { input, connect } => (
            "purify",
            commands::purify(&read_input(input)?, *connect, &cfg)?,
        ),
        Command::Verify { only } => ("verify", verify::run_suite(&cfg, only)?),
    };
    let rendered = report::render(name, &cfg, &outcome.result, g.output);
    let mut out = std::io::stdout().lock();
    out.write_all(rendered.as_bytes()).map_err(CliError::Io)?;
    out.flush().map_err(CliError::Io)?;
    Ok(if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(outcome.failure_code)
    })
}

fn read_input(arg: &InputArg) -> Result<String, CliError> {
    match &arg.input {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(CliError::Io),
        _ => std::io::read_to_string(std::io::stdin()).map_err(CliError::Io),
    }
}
