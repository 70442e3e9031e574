//! `pnex`: batch front end for prescribed-null-expansion runs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use pnex::{MuConvention, TraceConvention};

use commands::Outcome;
use config::{Method, RunConfig};
use output::Output;

#[derive(Parser)]
#[command(name = "pnex", version, about = "Find and analyze hypersurfaces of prescribed null expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    trace_convention: Option<TraceArg>,
    #[arg(long, global = true, value_enum)]
    mu_convention: Option<MuArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TraceArg {
    Ambient,
    Induced,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MuArg {
    Standard,
    Literal,
}

#[derive(Subcommand)]
enum Command {
    /// Check the modified dominant energy condition on the data set.
    DecCheck,
    /// Find hypersurfaces with θ = h.
    FindPne {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Principal eigenpair of the stability operator of a surface.
    Stability {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Conformal scalar curvature and rigidity margins of a surface.
    Topology {
        #[arg(long)]
        surface: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::DecCheck => "dec-check",
            Self::FindPne { .. } => "find-pne",
            Self::Stability { .. } => "stability",
            Self::Topology { .. } => "topology",
        }
    }
}

fn load(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let path = cli.config.as_ref().ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(t) = cli.trace_convention {
        cfg.conventions.trace = match t {
            TraceArg::Ambient => TraceConvention::Ambient,
            TraceArg::Induced => TraceConvention::Induced,
        };
    }
    if let Some(m) = cli.mu_convention {
        cfg.conventions.mu = match m {
            MuArg::Standard => MuConvention::Standard,
            MuArg::Literal => MuConvention::Literal,
        };
    }
    let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).ok_or_else(commands::missing_out)?;
    Ok((cfg, out))
}

fn run(cli: &Cli, out: &mut Output, cfg: &RunConfig) -> Result<Outcome> {
    match &cli.command {
        Command::DecCheck => commands::dec_check(cfg, out),
        Command::FindPne { method } => {
            let m = method.or(cfg.find_pne.method).unwrap_or(Method::Graph);
            commands::find_pne(cfg, m, out)
        }
        Command::Stability { surface } => commands::stability(cfg, surface, out),
        Command::Topology { surface } => commands::topology(cfg, surface, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let (cfg, dir) = match load(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let mut out = match Output::create(&dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let code = match run(&cli, &mut out, &cfg) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(dump) = commands::iterate_dump(&e) {
                if let Err(w) = out.json("iterate.json", &dump) {
                    eprintln!("error: {w:#}");
                }
            }
            // dec-check has no solver; every other failure of a solver maps to 2
            if name != "dec-check" && commands::is_solver_failure(&e) { 2 } else { 1 }
        }
    };
    if let Err(e) = out.finish(name, code) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
