//! `dbar`: command-line front end for the dbar-core experiments.

mod args;
mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dbar_core::Execution;

use args::*;
use commands::Ctx;
use config::ExperimentConfig;
use report::{Output, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{context}: {source}")]
    Module { context: String, source: dbar_core::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Module { source, .. } => match source {
                dbar_core::Error::Parse { .. } | dbar_core::Error::InvalidArgument(_) | dbar_core::Error::Domain(_) => 1,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dbar", version, about = "d-bar, corona and ideal-division experiments on planar compacta")]
struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV, text and JSON outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use this many dyadic levels starting from the first grid spacing.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rasterize a domain and dump its mask.
    Domains(DomainsArgs),
    /// Cauchy transform with its d-bar verification study.
    Cauchy(CauchyArgs),
    /// Smooth Bezout solutions.
    Bezout(BezoutArgs),
    /// Corona and g-power pipelines.
    Corona(CoronaArgs),
    /// Division certificate for f^N / g.
    Divide(DivideArgs),
    /// The counterexample battery.
    Sharpness,
    /// Faa di Bruno coefficients and oracle checks.
    Faa(FaaArgs),
    /// Local L-connectivity probe.
    Lconn(LconnArgs),
    /// Taylor remainder decay.
    Taylor(TaylorArgs),
    /// Run the subcommand named by the config's `command` key.
    Run,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Domains(_) => "domains",
            Command::Cauchy(_) => "cauchy",
            Command::Bezout(_) => "bezout",
            Command::Corona(_) => "corona",
            Command::Divide(_) => "divide",
            Command::Sharpness => "sharpness",
            Command::Faa(_) => "faa",
            Command::Lconn(_) => "lconn",
            Command::Taylor(_) => "taylor",
            Command::Run => "run",
        }
    }

    fn from_name(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "domains" => Command::Domains(Default::default()),
            "cauchy" => Command::Cauchy(Default::default()),
            "bezout" => Command::Bezout(Default::default()),
            "corona" => Command::Corona(Default::default()),
            "divide" => Command::Divide(Default::default()),
            "sharpness" => Command::Sharpness,
            "faa" => Command::Faa(Default::default()),
            "lconn" => Command::Lconn(Default::default()),
            "taylor" => Command::Taylor(Default::default()),
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        })
    }
}

fn dispatch(ctx: &Ctx, cmd: &Command) -> Result<RunReport, CliError> {
    match cmd {
        Command::Domains(a) => commands::domains(ctx, a),
        Command::Cauchy(a) => commands::cauchy(ctx, a),
        Command::Bezout(a) => commands::bezout(ctx, a),
        Command::Corona(a) => commands::corona(ctx, a),
        Command::Divide(a) => commands::divide(ctx, a),
        Command::Sharpness => commands::sharpness(ctx),
        Command::Faa(a) => commands::faa(ctx, a),
        Command::Lconn(a) => commands::lconn(ctx, a),
        Command::Taylor(a) => commands::taylor(ctx, a),
        Command::Run => unreachable!(),
    }
}

fn run(cli: Cli) -> Result<RunReport, CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let command = match cli.command {
        Command::Run => match &cfg.command {
            Some(name) => Command::from_name(name)?,
            None => return Err(CliError::Config("`run` needs a config with a `command` key".into())),
        },
        c => match &cfg.command {
            Some(name) if name != c.name() => {
                return Err(CliError::Config(format!("config is for `{name}`, not `{}`", c.name())));
            }
            _ => c,
        },
    };
    let exec = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Execution::Sequential,
        Some(k) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let ctx = Ctx { cfg, out: Output::new(cli.out)?, levels: cli.levels, exec };
    let report = dispatch(&ctx, &command)?;
    ctx.out.report(&report)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("acceptance checks failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
