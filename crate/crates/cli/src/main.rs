use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use relayopt::{parse_config, run, Experiment, ExperimentConfig};
use relayopt_core::conic::{self, Status};

#[derive(Parser)]
#[command(name = "relayopt", version, about = "Relay selection and secure beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config file.
    Run(RunArgs),
    /// Winners, transfers and utilities of one truthful auction.
    VcgDemo(RunArgs),
    /// Payoff of each relay as its report varies.
    PayoffCurve(RunArgs),
    /// Truthful auction next to one with an exaggerated report.
    Exaggeration(RunArgs),
    /// Monte Carlo expected payoff against random rivals.
    ExpectedPayoff(RunArgs),
    /// Mean secrecy rate of both schemes over a power grid.
    PowerSweep(RunArgs),
    /// Objective trace of the alternating optimizer per seed.
    Convergence(RunArgs),
    /// Per-seed secrecy rates of both schemes.
    Baselines(RunArgs),
    /// Solve a conic problem given in the plain-text format.
    Solve {
        path: PathBuf,
        #[arg(long, default_value_t = conic::DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration; optional for the named experiments.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the configured seeds with this one.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV output.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Recompute 1% of the rows and check them.
    #[arg(long)]
    verify: bool,
}

fn load(args: &RunArgs, named: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, named) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(e)) => ExperimentConfig::defaults(e),
        (None, None) => bail!("`run` needs --config"),
    };
    if let Some(e) = named {
        if cfg.experiment != e {
            bail!("config describes `{}` but the subcommand is `{e}`", cfg.experiment);
        }
    }
    if let Some(s) = args.seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

fn execute(args: &RunArgs, named: Option<Experiment>) -> Result<()> {
    let cfg = load(args, named)?;
    let report = run(&cfg, &args.out, args.verify)?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("wrote {} rows to {}", report.table.rows.len(), report.path.display());
    if report.skipped > 0 {
        println!("skipped {} infeasible instances", report.skipped);
    }
    if args.verify {
        println!("verified {} rows", report.verified);
    }
    Ok(())
}

fn solve(path: &PathBuf, tol: f64) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let problem = conic::load(&text)?;
    let sol = conic::solve(&problem, tol, conic::DEFAULT_MAX_ITER)?;
    println!("status {:?}", sol.status);
    println!("iterations {}", sol.iterations);
    if sol.status == Status::Optimal {
        println!("objective {}", sol.obj);
        let x: Vec<String> = sol.x.iter().map(|v| v.to_string()).collect();
        println!("x {}", x.join(" "));
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RELAYOPT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("RELAYOPT_THREADS=`{v}` is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads()?;
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) => execute(a, None),
        Command::VcgDemo(a) => execute(a, Some(Experiment::VcgDemo)),
        Command::PayoffCurve(a) => execute(a, Some(Experiment::PayoffCurve)),
        Command::Exaggeration(a) => execute(a, Some(Experiment::Exaggeration)),
        Command::ExpectedPayoff(a) => execute(a, Some(Experiment::ExpectedPayoff)),
        Command::PowerSweep(a) => execute(a, Some(Experiment::PowerSweep)),
        Command::Convergence(a) => execute(a, Some(Experiment::Convergence)),
        Command::Baselines(a) => execute(a, Some(Experiment::Baselines)),
        Command::Solve { path, tol } => solve(path, *tol),
    }
}
