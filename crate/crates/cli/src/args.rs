use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, FileConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nsmo",
    version,
    about = "Multistart runs of the nonsmooth multiobjective descent method"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a batch of solver runs and export fronts, traces and fields.
    Run(Box<RunArgs>),
    /// List the available problems.
    Problems,
}

/// Flags override the values of `--config`.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// analytic:<name>, obstacle:constant[=<value>] or obstacle:piecewise.
    #[arg(long)]
    pub problem: Option<String>,
    /// Mesh sizes, comma separated.
    #[arg(long = "hmax", value_delimiter = ',')]
    pub h_max: Option<Vec<f64>>,
    /// Constant initial controls, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub u0: Option<Vec<f64>>,
    /// Number of seeded random starts for analytic problems.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Explicit start point for analytic problems, comma separated; repeatable.
    #[arg(long = "start", action = clap::ArgAction::Append, allow_hyphen_values = true)]
    pub start: Vec<String>,
    #[arg(long)]
    pub eps_bar: Option<f64>,
    #[arg(long)]
    pub delta_bar: Option<f64>,
    /// Armijo parameter.
    #[arg(long)]
    pub c: Option<f64>,
    /// Initial trial step of the line search.
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// constant or inverse-sqrt.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Additional reference level for mesh-convergence distances.
    #[arg(long = "reference-hmax")]
    pub reference_h_max: Option<f64>,
    /// Write wall_ms = 0 so that reruns give byte-identical output.
    #[arg(long)]
    pub no_timing: bool,
}

impl RunArgs {
    pub fn into_config(self) -> anyhow::Result<ExperimentConfig> {
        let mut file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        macro_rules! merge {
            ($($dst:expr => $src:expr),* $(,)?) => { $( if let Some(v) = $src { $dst = Some(v); } )* };
        }
        merge!(
            file.problem => self.problem,
            file.h_max => self.h_max,
            file.u0 => self.u0,
            file.starts => self.starts,
            file.seed => self.seed,
            file.jobs => self.jobs,
            file.out => self.out,
            file.reference_h_max => self.reference_h_max,
            file.solver.eps_bar => self.eps_bar,
            file.solver.delta_bar => self.delta_bar,
            file.solver.c => self.c,
            file.solver.t0 => self.t0,
            file.solver.max_iters => self.max_iters,
            file.solver.schedule => self.schedule,
        );
        if !self.start.is_empty() {
            file.start_points = Some(parse_points(&self.start)?);
        }
        if self.no_timing {
            file.no_timing = Some(true);
        }
        ExperimentConfig::resolve(file)
    }
}

/// Each `--start` value is one point, `x,y`.
fn parse_points(raw: &[String]) -> anyhow::Result<Vec<Vec<f64>>> {
    raw.iter()
        .map(|s| {
            s.split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| anyhow::anyhow!("bad coordinate '{t}': {e}"))
                })
                .collect()
        })
        .collect()
}
