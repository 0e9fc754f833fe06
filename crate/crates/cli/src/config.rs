//! Experiment configuration: a TOML file merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context};
use nsmo_core::analytic::AnalyticProblem;
use nsmo_core::fem::ObstacleKind;
use nsmo_core::{Schedule, SolverConfig};
use serde::Deserialize;

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Analytic(String),
    Obstacle(ObstacleKind),
}

impl ProblemSpec {
    pub fn is_obstacle(&self) -> bool {
        matches!(self, ProblemSpec::Obstacle(_))
    }
}

impl FromStr for ProblemSpec {
    type Err = anyhow::Error;

    /// `analytic:<name>`, `obstacle:piecewise`, `obstacle:constant` (ψ ≡ 1)
    /// or `obstacle:constant=<value>`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .with_context(|| format!("problem '{s}' must look like analytic:<name> or obstacle:<kind>"))?;
        match family {
            "analytic" => {
                AnalyticProblem::by_name(rest)?;
                Ok(ProblemSpec::Analytic(rest.to_string()))
            }
            "obstacle" => match rest.split_once('=') {
                None if rest == "constant" => Ok(ProblemSpec::Obstacle(ObstacleKind::Constant(1.0))),
                None if rest == "piecewise" => Ok(ProblemSpec::Obstacle(ObstacleKind::Piecewise)),
                Some(("constant", v)) => {
                    let v: f64 = v.parse().with_context(|| format!("bad obstacle value '{v}'"))?;
                    ensure!(
                        v.is_finite() && v >= 0.0,
                        "constant obstacle must be finite and nonnegative"
                    );
                    Ok(ProblemSpec::Obstacle(ObstacleKind::Constant(v)))
                }
                _ => bail!("unknown obstacle '{rest}' (expected constant, constant=<v> or piecewise)"),
            },
            other => bail!("unknown problem family '{other}'"),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Analytic(name) => write!(f, "analytic:{name}"),
            ProblemSpec::Obstacle(ObstacleKind::Constant(v)) if *v == 1.0 => f.write_str("obstacle:constant"),
            ProblemSpec::Obstacle(ObstacleKind::Constant(v)) => write!(f, "obstacle:constant={v}"),
            ProblemSpec::Obstacle(ObstacleKind::Piecewise) => f.write_str("obstacle:piecewise"),
        }
    }
}

/// How initial points are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Starts {
    /// Constant controls `u₀ ≡ value` (obstacle problems).
    Constants(Vec<f64>),
    /// Explicit points (analytic problems).
    Points(Vec<Vec<f64>>),
    /// Uniform draws from `[−5, 5]^d`, seeded.
    Random(usize),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub h_max: Vec<f64>,
    pub starts: Starts,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    /// Extra obstacle runs on this mesh, used as reference solutions.
    pub reference_h_max: Option<f64>,
    /// When off, `wall_ms` is written as 0 so reruns give byte-identical fronts.
    pub record_timing: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub h_max: Option<Vec<f64>>,
    pub u0: Option<Vec<f64>>,
    pub starts: Option<usize>,
    pub start_points: Option<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub reference_h_max: Option<f64>,
    pub no_timing: Option<bool>,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub eps_bar: Option<f64>,
    pub delta_bar: Option<f64>,
    pub c: Option<f64>,
    pub t0: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_inner_iters: Option<usize>,
    /// `constant` or `inverse-sqrt`.
    pub schedule: Option<String>,
    pub eps0: Option<f64>,
    pub delta0: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub const DEFAULT_H_MAX: [f64; 2] = [0.4, 0.2];
pub const DEFAULT_RANDOM_STARTS: usize = 20;

fn parse_schedule(name: &str, eps0: Option<f64>, delta0: Option<f64>) -> anyhow::Result<Schedule> {
    match name {
        "constant" => Ok(Schedule::Constant),
        "inverse-sqrt" => Ok(Schedule::InverseSqrt {
            eps0: eps0.unwrap_or(0.1),
            delta0: delta0.unwrap_or(0.1),
        }),
        other => bail!("unknown schedule '{other}' (expected constant or inverse-sqrt)"),
    }
}

impl ExperimentConfig {
    /// Resolves a file configuration (already merged with flag overrides)
    /// against the defaults.
    pub fn resolve(file: FileConfig) -> anyhow::Result<Self> {
        let problem: ProblemSpec = file.problem.as_deref().unwrap_or("obstacle:constant").parse()?;

        let mut solver = SolverConfig::default();
        let s = &file.solver;
        if let Some(v) = s.eps_bar {
            solver.eps_bar = v;
        }
        if let Some(v) = s.delta_bar {
            solver.delta_bar = v;
        }
        if let Some(v) = s.c {
            solver.c = v;
        }
        if let Some(v) = s.t0 {
            solver.t0 = v;
        }
        if let Some(v) = s.max_iters {
            solver.max_outer_iters = v;
        }
        if let Some(v) = s.max_inner_iters {
            solver.max_inner_iters = v;
        }
        if let Some(name) = &s.schedule {
            solver.schedule = parse_schedule(name, s.eps0, s.delta0)?;
        }
        solver.validate()?;

        let starts = match &problem {
            ProblemSpec::Obstacle(_) => {
                ensure!(
                    file.start_points.is_none() && file.starts.is_none(),
                    "obstacle problems take constant initial controls (u0), not start points"
                );
                Starts::Constants(
                    file.u0
                        .clone()
                        .unwrap_or_else(|| (1..=8).map(f64::from).collect()),
                )
            }
            ProblemSpec::Analytic(name) => {
                ensure!(file.u0.is_none(), "u0 applies to obstacle problems only");
                let dim = AnalyticProblem::by_name(name)?.dim();
                match &file.start_points {
                    Some(points) => {
                        for p in points {
                            ensure!(p.len() == dim, "start point {p:?} must have {dim} coordinates");
                        }
                        Starts::Points(points.clone())
                    }
                    None => Starts::Random(file.starts.unwrap_or(DEFAULT_RANDOM_STARTS)),
                }
            }
        };
        let n_starts = match &starts {
            Starts::Constants(v) => v.len(),
            Starts::Points(v) => v.len(),
            Starts::Random(n) => *n,
        };
        ensure!(n_starts > 0, "at least one start is required");

        let h_max = if problem.is_obstacle() {
            let h = file.h_max.clone().unwrap_or_else(|| DEFAULT_H_MAX.to_vec());
            ensure!(!h.is_empty(), "h_max list is empty");
            for &v in &h {
                ensure!(v.is_finite() && v > 0.0, "h_max must be positive, got {v}");
            }
            h
        } else {
            Vec::new()
        };
        if let Some(r) = file.reference_h_max {
            ensure!(
                problem.is_obstacle(),
                "reference_h_max applies to obstacle problems only"
            );
            ensure!(r.is_finite() && r > 0.0, "reference_h_max must be positive");
        }

        let jobs = file
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        ensure!(jobs > 0, "jobs must be positive");

        Ok(Self {
            problem,
            h_max,
            starts,
            solver,
            out: file.out.clone().unwrap_or_else(|| PathBuf::from("results")),
            seed: file.seed.unwrap_or(0),
            jobs,
            reference_h_max: file.reference_h_max,
            record_timing: !file.no_timing.unwrap_or(false),
        })
    }
}
