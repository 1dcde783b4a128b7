use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use peergrid_core::coordinator::{ActivationModel, RunConfig, StepsizeSchedule};
use peergrid_core::experiment::{run_experiment, ExperimentMode};
use peergrid_core::oracle::solve_centralized;
use peergrid_core::scenario::{
    generate_with, load_scenario, write_scenario, Scenario, SynthOptions,
};
use peergrid_core::CoreError;

#[derive(Parser)]
#[command(
    name = "peergrid",
    version,
    about = "Peer-to-peer energy trading simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more solution modes and write reports.
    Run(RunArgs),
    /// Write a synthetic scenario.
    Generate(GenerateArgs),
    /// Load a scenario and print a short description.
    Validate(ScenarioArgs),
    /// Solve the centralized problem and print costs.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for relative profile paths; defaults to the config's directory.
    #[arg(long)]
    profile_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoSchedule {
    Constant,
    Harmonic,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    /// Comma-separated: sync, async, oracle, oracle-notrade.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "sync,async,oracle,oracle-notrade"
    )]
    mode: Vec<ExperimentMode>,
    #[arg(long, conflicts_with = "dropout")]
    activation_prob: Option<f64>,
    /// Fraction of prosumers dropped every iteration.
    #[arg(long)]
    dropout: Option<f64>,
    /// Force a prosumer active once its last update is this many iterations old.
    #[arg(long)]
    max_delay: Option<usize>,
    #[arg(long, value_enum)]
    rho_schedule: Option<RhoSchedule>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Write per-iteration convergence traces.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Give every prosumer identical parameters and profiles.
    #[arg(long)]
    identical: bool,
    /// Config file to write; profiles go to `profiles/` beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: ScenarioArgs,
    #[arg(long)]
    no_trade: bool,
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    load_scenario(&args.scenario, args.profile_dir.as_deref())
        .with_context(|| format!("loading {}", args.scenario.display()))
}

fn run_config(base: RunConfig, a: &RunArgs) -> RunConfig {
    let mut c = base;
    let p_active = a.activation_prob.unwrap_or(match base.activation {
        ActivationModel::Bernoulli { p_active }
        | ActivationModel::BoundedDelay { p_active, .. } => p_active,
        _ => 0.8,
    });
    if let Some(fraction) = a.dropout {
        c.activation = ActivationModel::FixedDropout { fraction };
    } else if let Some(max_delay) = a.max_delay {
        c.activation = ActivationModel::BoundedDelay {
            max_delay,
            p_active,
        };
    } else if a.activation_prob.is_some() {
        c.activation = ActivationModel::Bernoulli { p_active };
    }
    let rho0 = a.rho0.unwrap_or(c.stepsize.rho0());
    c.stepsize = match (a.rho_schedule, c.stepsize) {
        (Some(RhoSchedule::Constant), _) | (None, StepsizeSchedule::Constant { .. }) => {
            StepsizeSchedule::Constant { rho0 }
        }
        (Some(RhoSchedule::Harmonic), _) | (None, StepsizeSchedule::Harmonic { .. }) => {
            StepsizeSchedule::Harmonic { rho0 }
        }
    };
    c.eps_primal = a.eps1.unwrap_or(c.eps_primal);
    c.eps_dual = a.eps2.unwrap_or(c.eps_dual);
    c.max_iter = a.max_iter.unwrap_or(c.max_iter);
    c.seed = a.seed.unwrap_or(c.seed);
    c
}

fn execute(cli: Cli) -> Result<()> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Run(a) => {
            let scenario = load(&a.input)?;
            let config = run_config(scenario.run, &a);
            config.validate()?;
            let report = run_experiment(&scenario, &a.mode, &config, &a.out_dir, a.trace)?;
            for line in &report.summary {
                writeln!(out, "{line}")?;
            }
            for c in &report.costs.comparisons {
                writeln!(
                    out,
                    "{}: total cost {:.4} vs {:.4} without trading ({:+.2}%)",
                    c.mode, c.total_with, c.total_without, -c.total_reduction_pct
                )?;
            }
            writeln!(out, "reports written to {}", a.out_dir.display())?;
        }
        Command::Generate(a) => {
            if a.n == 0 {
                bail!("--n must be at least 1");
            }
            let scenario = generate_with(
                a.n,
                a.seed,
                SynthOptions {
                    horizon: a.horizon,
                    identical: a.identical,
                },
            );
            if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_scenario(&scenario, &a.out)?;
            writeln!(out, "wrote {} prosumers to {}", a.n, a.out.display())?;
        }
        Command::Validate(a) => {
            let s = load(&a)?;
            writeln!(
                out,
                "{}",
                serde_json::json!({
                    "prosumers": s.num_prosumers(),
                    "horizon": s.grid.horizon,
                    "slot_hours": s.grid.slot_hours,
                    "branches": s.network.branches(),
                    "run": {
                        "mode": s.run.mode,
                        "activation": s.run.activation,
                        "stepsize": s.run.stepsize,
                        "max_iter": s.run.max_iter,
                    },
                })
            )?;
        }
        Command::Oracle(a) => {
            let s = load(&a.input)?;
            let sol = solve_centralized(&s, !a.no_trade)?;
            let costs: Vec<_> = sol
                .costs
                .iter()
                .map(|c| serde_json::json!({"id": c.id, "schedule": c.schedule, "trading": c.trading, "total": c.total}))
                .collect();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "trading": !a.no_trade,
                    "objective": sol.objective,
                    "prosumers": costs,
                }))?
            )?;
        }
    }
    Ok(())
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::Model(_)) | Some(CoreError::Scenario(_)) => "invalid-input",
        Some(CoreError::File { .. }) | Some(CoreError::Io(_)) => "io",
        Some(CoreError::Infeasible { .. }) => "infeasible",
        Some(CoreError::NotConverged { .. }) => "not-converged",
        Some(_) => "solver",
        None => "error",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = serde_json::json!({
                "error": error_kind(&e),
                "message": format!("{e:#}"),
            });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
