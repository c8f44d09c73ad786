mod commands;
mod config;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

const FORMATS: &str = "\
Outputs (with --out PREFIX):
  PREFIX.csv          scans and slices: columns x,y,value,active, one row per
                      cell with x varying fastest. ADI grids: x=tau, y=sigma,
                      value=Omega(tau,sigma,1). MSI grids: x=tau, y=sigma,
                      value=altitude |I_lambda| in [0,2]. Slices: x=the free
                      parameter, y=lambda, value=Omega, active=1 for cells of
                      a negative region reaching lambda=1, else 0. The active
                      column is empty for ADI and MSI grids.
                      simulate: columns t,d with d(t)=max_i |x_i(t)-s|_inf.
  PREFIX.json         island summary, verdict or result document.
  PREFIX.config.toml  resolved configuration; `msisland run --config` on it
                      reproduces the run.

Exit status: 0 success, 1 invalid input, 2 numerical failure.";

#[derive(Debug, Parser)]
#[command(
    name = "msisland",
    version,
    about = "Master stability islands of amplitude death in delay-coupled networks",
    after_help = FORMATS
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for scans (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List fixed points and Jacobian eigenvalues.
    FixedPoints {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate Omega(tau, sigma, lambda) at one point.
    MsfEval {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// auto, lambert or spectral.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scan Omega(tau, sigma, 1) and extract amplitude death islands.
    #[command(after_help = FORMATS)]
    ScanAdi {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scan lambda-interval altitudes and extract master stability islands.
    #[command(after_help = FORMATS)]
    ScanMsi {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stability slice over (tau or sigma) x lambda with active regions.
    #[command(after_help = FORMATS)]
    Slice {
        #[command(flatten)]
        system: SystemArgs,
        /// Held parameter, `tau=VALUE` or `sigma=VALUE`.
        #[arg(long)]
        fixed: Option<String>,
        /// Range of the free parameter, `min:max:count`.
        #[arg(long)]
        x: Option<String>,
        /// Samples of lambda over [-1, 1].
        #[arg(long)]
        lambda_count: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Amplitude-death verdict for a concrete network.
    NetworkCheck {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integrate the delay-coupled network directly.
    #[command(after_help = FORMATS)]
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the command named in the config file.
    Run {
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// rossler, lorenz, chen or custom.
    #[arg(long)]
    system: Option<String>,
    /// Parameter override `name=value` (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Index into the fixed-point list.
    #[arg(long)]
    fixed_point: Option<usize>,
    /// Inner coupling H: identity, diag:a,b,c or rows:a,b,c;d,e,f;...
    #[arg(long)]
    h: Option<String>,
    /// Custom system: DF(s) as rows `a,b;c,d`.
    #[arg(long)]
    jacobian: Option<String>,
    /// Custom system: the fixed point s as `x,y,...`.
    #[arg(long)]
    point: Option<String>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// tau range `min:max:count`.
    #[arg(long)]
    tau: Option<String>,
    /// sigma range `min:max:count`.
    #[arg(long)]
    sigma: Option<String>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph file: JSON (`adjacency` or `nodes` + `edges`) or a plain matrix.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Undirected ring on N nodes.
    #[arg(long, value_name = "N")]
    ring: Option<usize>,
    /// Complete graph on N nodes.
    #[arg(long, value_name = "N")]
    complete: Option<usize>,
    /// Treat the graph file as the coupling matrix G itself.
    #[arg(long)]
    direct: bool,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Integrate the linearized network and report its growth rate.
    #[arg(long)]
    variational: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the random initial perturbation.
    #[arg(long)]
    magnitude: Option<f64>,
    /// Steps per delay interval.
    #[arg(long)]
    delay_steps: Option<usize>,
    /// Step size; must divide tau.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Keep every N-th sample of d(t) in the CSV.
    #[arg(long)]
    record_every: Option<usize>,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output path prefix.
    #[arg(long)]
    out: Option<String>,
}

impl SystemArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<(), CliError> {
        c.system.name = self.system.clone();
        for p in &self.params {
            let (k, v) =
                parse::assignment(p).map_err(|e| CliError::validation(format!("--param: {e}")))?;
            c.system.params.insert(k, v);
        }
        c.system.fixed_point = self.fixed_point;
        c.system.h = self.h.clone();
        c.system.jacobian = self.jacobian.clone();
        c.system.point = self.point.clone();
        Ok(())
    }
}

impl GraphArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.network.graph = self.graph.clone();
        c.network.ring = self.ring;
        c.network.complete = self.complete;
        c.network.direct = self.direct.then_some(true);
    }
}

/// Failure of a run, with the exit status it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Self::Numerical(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl From<msisland_core::Error> for CliError {
    fn from(e: msisland_core::Error) -> Self {
        if e.is_validation() {
            Self::Validation(e.to_string())
        } else {
            Self::Numerical(e.to_string())
        }
    }
}

fn command_config(cmd: &Command) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::default();
    let name = match cmd {
        Command::FixedPoints { system, out } => {
            system.apply(&mut c)?;
            c.output.out = out.out.clone();
            "fixed-points"
        }
        Command::MsfEval {
            system,
            tau,
            sigma,
            lambda,
            method,
            out,
        } => {
            system.apply(&mut c)?;
            c.point.tau = *tau;
            c.point.sigma = *sigma;
            c.point.lambda = *lambda;
            c.point.method = method.clone();
            c.output.out = out.out.clone();
            "msf-eval"
        }
        Command::ScanAdi { system, grid, out } | Command::ScanMsi { system, grid, out } => {
            system.apply(&mut c)?;
            c.scan.tau = grid.tau.clone();
            c.scan.sigma = grid.sigma.clone();
            c.output.out = out.out.clone();
            if matches!(cmd, Command::ScanAdi { .. }) {
                "scan-adi"
            } else {
                "scan-msi"
            }
        }
        Command::Slice {
            system,
            fixed,
            x,
            lambda_count,
            out,
        } => {
            system.apply(&mut c)?;
            c.scan.fixed = fixed.clone();
            c.scan.x = x.clone();
            c.scan.lambda_count = *lambda_count;
            c.output.out = out.out.clone();
            "slice"
        }
        Command::NetworkCheck {
            system,
            graph,
            tau,
            sigma,
            out,
        } => {
            system.apply(&mut c)?;
            graph.apply(&mut c);
            c.point.tau = *tau;
            c.point.sigma = *sigma;
            c.output.out = out.out.clone();
            "network-check"
        }
        Command::Simulate {
            system,
            graph,
            tau,
            sigma,
            sim,
            out,
        } => {
            system.apply(&mut c)?;
            graph.apply(&mut c);
            c.point.tau = *tau;
            c.point.sigma = *sigma;
            c.simulate.variational = sim.variational.then_some(true);
            c.simulate.seed = sim.seed;
            c.simulate.magnitude = sim.magnitude;
            c.simulate.delay_steps = sim.delay_steps;
            c.simulate.step = sim.step;
            c.simulate.t_max = sim.t_max;
            c.simulate.record_every = sim.record_every;
            c.output.out = out.out.clone();
            "simulate"
        }
        Command::Run { out } => {
            c.output.out = out.out.clone();
            return Ok(c);
        }
    };
    c.command = Some(name.to_string());
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if matches!(cli.command, Command::Run { .. }) && cli.config.is_none() {
        return Err(CliError::validation("--config: `run` needs a config file"));
    }
    let mut top = command_config(&cli.command)?;
    top.run.workers = cli.workers;
    let cfg = file.overlay(top);
    commands::execute(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
