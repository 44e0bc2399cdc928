mod commands;
mod config;
mod error;
mod expr;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{read_config, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "momentheat", version, about = "Spectral Galerkin heat flows under harmonic moment conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    cutoff: Option<String>,
    /// v, vtilde or krein.
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue clusters as `index,lambda,multiplicity,residual`.
    Eig {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<String>,
    },
    /// Heat-flow trace of an initial condition.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ic: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<String>,
        #[arg(long)]
        samples: Option<String>,
        /// h or l2.
        #[arg(long)]
        projection: Option<String>,
    },
    /// Runs an invariant suite; exit code 0 iff every assertion passes.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// `eig` repeated over several cutoffs, with a trailing `cutoff` column.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cutoffs: Option<String>,
        #[arg(long)]
        count: Option<String>,
    },
}

fn settings(common: &Common, extra: &[(&str, &Option<String>)]) -> Result<RunConfig, CliError> {
    let mut map = match &common.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let flags = [
        ("dim", &common.dim),
        ("cutoff", &common.cutoff),
        ("space", &common.space),
        ("out", &common.out),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            map.insert(key.to_string(), v.clone());
        }
    }
    RunConfig::from_settings(&map)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Eig { common, count } => {
            let cfg = settings(common, &[("count", count)])?;
            commands::emit(&cfg, &commands::eig_csv(&cfg)?)
        }
        Command::Sweep { common, cutoffs, count } => {
            let cfg = settings(common, &[("cutoffs", cutoffs), ("count", count)])?;
            commands::emit(&cfg, &commands::sweep_csv(&cfg)?)
        }
        Command::Evolve {
            common,
            ic,
            t_end,
            samples,
            projection,
        } => {
            let cfg = settings(
                common,
                &[("ic", ic), ("t-end", t_end), ("samples", samples), ("projection", projection)],
            )?;
            let (csv, warnings) = commands::evolve_csv(&cfg)?;
            for w in warnings {
                eprintln!("{w}");
            }
            commands::emit(&cfg, &csv)
        }
        Command::Check { common, suite, seed } => {
            let cfg = settings(common, &[("suite", suite), ("seed", seed)])?;
            let (text, failed, total) = commands::check_report(&cfg)?;
            commands::emit(&cfg, &text)?;
            if failed > 0 {
                return Err(CliError::ChecksFailed { failed, total });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("momentheat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
