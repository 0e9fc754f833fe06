//! Batch execution of solver runs over starts × mesh sizes.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use nsmo_core::analytic::AnalyticProblem;
use nsmo_core::fem::{ObstacleControlProblem, DEFAULT_WEIGHT};
use nsmo_core::{solve, Primal, RunRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ProblemSpec, Starts};
use crate::output;

/// Bounds of the box random analytic starts are drawn from.
pub const START_BOX: (f64, f64) = (-5.0, 5.0);

#[derive(Clone, Debug)]
enum Start {
    Constant(f64),
    Point(Vec<f64>),
}

#[derive(Clone, Debug)]
struct RunSpec {
    run_id: String,
    h_max: Option<f64>,
    start_label: String,
    start: Start,
    reference: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceDistance {
    /// Euclidean distance between `(J₁, J₂)` and the reference values.
    pub image: f64,
    /// L² distance between the control and the reference control, measured
    /// on the reference mesh.
    pub control_l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub problem: String,
    pub h_max: Option<f64>,
    pub start_label: String,
    pub reference: bool,
    /// Terminal solver status, or `Error` when the run aborted.
    pub status: String,
    pub iters: usize,
    pub values: Vec<f64>,
    pub wall_ms: f64,
    pub max_xi_set: usize,
    pub final_direction_norm: Option<f64>,
    pub func_evals: usize,
    pub subgrad_evals: usize,
    pub num_active: Option<usize>,
    pub pareto_distance: Option<f64>,
    pub reference_distance: Option<ReferenceDistance>,
    pub error: Option<String>,
}

/// Final obstacle state of a run.
#[derive(Clone, Debug)]
pub struct FieldData {
    pub u: Primal,
    pub y: Primal,
    pub active: Vec<bool>,
}

#[derive(Debug)]
pub struct RunResult {
    pub summary: RunSummary,
    pub record: Option<RunRecord>,
    pub field: Option<FieldData>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub problem: String,
    pub seed: u64,
    pub eps_bar: f64,
    pub delta_bar: f64,
    pub c: f64,
    pub t0: f64,
    pub max_iters: usize,
    pub weight: Option<f64>,
    pub completed: usize,
    pub failed: usize,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub runs: Vec<RunResult>,
}

impl Experiment {
    pub fn all_completed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn run(&self, run_id: &str) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.summary.run_id == run_id)
    }
}

fn start_label(start: &Start, index: usize, width: usize) -> String {
    match start {
        Start::Constant(v) => format!("u0={v}"),
        Start::Point(_) => format!("s{index:0width$}"),
    }
}

fn plan(config: &ExperimentConfig, dim: usize) -> Vec<RunSpec> {
    let starts: Vec<Start> = match &config.starts {
        Starts::Constants(v) => v.iter().map(|&c| Start::Constant(c)).collect(),
        Starts::Points(p) => p.iter().cloned().map(Start::Point).collect(),
        Starts::Random(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            (0..*n)
                .map(|_| {
                    Start::Point(
                        (0..dim)
                            .map(|_| rng.gen_range(START_BOX.0..=START_BOX.1))
                            .collect(),
                    )
                })
                .collect()
        }
    };
    let width = starts.len().saturating_sub(1).to_string().len().max(2);

    let mut levels: Vec<(Option<f64>, bool)> = if config.problem.is_obstacle() {
        config.h_max.iter().map(|&h| (Some(h), false)).collect()
    } else {
        vec![(None, false)]
    };
    if let Some(r) = config.reference_h_max {
        levels.push((Some(r), true));
    }
    // Front rows are ordered by mesh size, then by start.
    levels.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });

    let mut specs = Vec::new();
    for (h_max, reference) in levels {
        for (i, start) in starts.iter().enumerate() {
            specs.push(RunSpec {
                run_id: String::new(),
                h_max,
                start_label: start_label(start, i, width),
                start: start.clone(),
                reference,
            });
        }
    }
    let id_width = specs.len().saturating_sub(1).to_string().len().max(3);
    for (i, s) in specs.iter_mut().enumerate() {
        s.run_id = format!("r{i:0id_width$}");
    }
    specs
}

fn h_key(h: f64) -> u64 {
    h.to_bits()
}

fn empty_summary(spec: &RunSpec, problem: &str) -> RunSummary {
    RunSummary {
        run_id: spec.run_id.clone(),
        problem: problem.to_string(),
        h_max: spec.h_max,
        start_label: spec.start_label.clone(),
        reference: spec.reference,
        status: "Error".into(),
        iters: 0,
        values: Vec::new(),
        wall_ms: 0.0,
        max_xi_set: 0,
        final_direction_norm: None,
        func_evals: 0,
        subgrad_evals: 0,
        num_active: None,
        pareto_distance: None,
        reference_distance: None,
        error: None,
    }
}

fn fill_from_record(summary: &mut RunSummary, record: &RunRecord, timing: bool) {
    let evals = record.total_evals();
    summary.status = record.status.as_str().to_string();
    summary.iters = record.iterations();
    summary.values = record.final_values.clone();
    summary.wall_ms = if timing {
        record.wall_time.as_secs_f64() * 1e3
    } else {
        0.0
    };
    summary.max_xi_set = record.max_xi_set_size();
    summary.final_direction_norm = Some(record.final_direction_norm).filter(|v| v.is_finite());
    summary.func_evals = evals.values;
    summary.subgrad_evals = evals.subgradients;
}

fn run_obstacle(
    spec: &RunSpec,
    problem: &ObstacleControlProblem,
    config: &ExperimentConfig,
    name: &str,
) -> RunResult {
    let mut summary = empty_summary(spec, name);
    let u0 = match &spec.start {
        Start::Constant(c) => Primal::constant(problem.dim(), *c),
        Start::Point(_) => unreachable!("obstacle runs start from constants"),
    };
    let outcome = solve(&u0, &config.solver, problem).and_then(|record| {
        let state = problem.solve_obstacle(&record.x)?;
        Ok((record, state))
    });
    match outcome {
        Ok((record, state)) => {
            fill_from_record(&mut summary, &record, config.record_timing);
            summary.num_active = Some(state.num_active());
            let field = FieldData {
                u: record.x.clone(),
                y: state.y,
                active: state.active,
            };
            RunResult {
                summary,
                record: Some(record),
                field: Some(field),
            }
        }
        Err(e) => {
            summary.error = Some(e.to_string());
            RunResult {
                summary,
                record: None,
                field: None,
            }
        }
    }
}

fn run_analytic(
    spec: &RunSpec,
    problem: &AnalyticProblem,
    config: &ExperimentConfig,
    name: &str,
) -> RunResult {
    let mut summary = empty_summary(spec, name);
    let x0 = match &spec.start {
        Start::Point(p) => Primal::new(p.clone()),
        Start::Constant(c) => Primal::constant(problem.dim(), *c),
    };
    match solve(&x0, &config.solver, problem) {
        Ok(record) => {
            fill_from_record(&mut summary, &record, config.record_timing);
            summary.pareto_distance = problem.pareto_distance(&record.x).ok();
            RunResult {
                summary,
                record: Some(record),
                field: None,
            }
        }
        Err(e) => {
            summary.error = Some(e.to_string());
            RunResult {
                summary,
                record: None,
                field: None,
            }
        }
    }
}

fn write_run_files(
    out: &Path,
    result: &RunResult,
    mesh_problem: Option<&ObstacleControlProblem>,
) -> anyhow::Result<()> {
    let id = &result.summary.run_id;
    if let Some(record) = &result.record {
        output::write_trace(&out.join(format!("trace_{id}.csv")), record)?;
    }
    if let (Some(field), Some(p)) = (&result.field, mesh_problem) {
        output::write_field(&out.join(format!("field_{id}.csv")), p.mesh(), field, p.psi())?;
    }
    Ok(())
}

/// Distances of every non-reference run to the reference run sharing its
/// start label.
fn attach_reference_distances(
    runs: &mut [RunResult],
    problems: &BTreeMap<u64, Arc<ObstacleControlProblem>>,
    reference_h: f64,
) -> anyhow::Result<()> {
    let reference_problem = &problems[&h_key(reference_h)];
    let refs: BTreeMap<String, (Vec<f64>, Primal)> = runs
        .iter()
        .filter(|r| r.summary.reference)
        .filter_map(|r| {
            let f = r.field.as_ref()?;
            Some((
                r.summary.start_label.clone(),
                (r.summary.values.clone(), f.u.clone()),
            ))
        })
        .collect();
    for run in runs.iter_mut().filter(|r| !r.summary.reference) {
        let (Some(field), Some(h)) = (&run.field, run.summary.h_max) else {
            continue;
        };
        let Some((ref_values, ref_u)) = refs.get(&run.summary.start_label) else {
            continue;
        };
        let coarse = &problems[&h_key(h)];
        let image = run
            .summary
            .values
            .iter()
            .zip(ref_values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let diff: Vec<f64> = reference_problem
            .mesh()
            .nodes()
            .iter()
            .zip(ref_u.coeffs())
            .map(|(&x, &r)| coarse.mesh().interpolate(field.u.coeffs(), x) - r)
            .collect();
        let control_l2 = reference_problem
            .operators()
            .mass
            .bilinear(&diff, &diff)
            .context("reference distance")?
            .max(0.0)
            .sqrt();
        run.summary.reference_distance = Some(ReferenceDistance { image, control_l2 });
    }
    Ok(())
}

/// Runs every (start, h_max) pair on a pool of `config.jobs` workers and
/// writes `front.csv`, `trace_<id>.csv`, `field_<id>.csv` and `summary.json`
/// into `config.out`.
///
/// Individual run failures are recorded with status `Error`; only setup and
/// I/O problems abort the batch.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<Experiment> {
    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("creating output directory {}", config.out.display()))?;
    let name = config.problem.to_string();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .context("building worker pool")?;

    let mut runs: Vec<RunResult> = match &config.problem {
        ProblemSpec::Obstacle(kind) => {
            let mut problems = BTreeMap::new();
            let levels = config.h_max.iter().chain(config.reference_h_max.iter());
            for &h in levels {
                if let std::collections::btree_map::Entry::Vacant(e) = problems.entry(h_key(h)) {
                    let p = ObstacleControlProblem::from_h_max(h, *kind, DEFAULT_WEIGHT)
                        .with_context(|| format!("setting up obstacle problem at h_max = {h}"))?;
                    e.insert(Arc::new(p));
                }
            }
            let specs = plan(config, 0);
            let mut runs = pool.install(|| {
                specs
                    .par_iter()
                    .map(|spec| {
                        let p = &problems[&h_key(spec.h_max.expect("obstacle runs have a mesh"))];
                        let result = run_obstacle(spec, p, config, &name);
                        write_run_files(&config.out, &result, Some(p)).map(|_| result)
                    })
                    .collect::<anyhow::Result<Vec<_>>>()
            })?;
            if let Some(r) = config.reference_h_max {
                attach_reference_distances(&mut runs, &problems, r)?;
            }
            runs
        }
        ProblemSpec::Analytic(pname) => {
            let problem = AnalyticProblem::by_name(pname)?;
            let specs = plan(config, problem.dim());
            pool.install(|| {
                specs
                    .par_iter()
                    .map(|spec| {
                        let result = run_analytic(spec, &problem, config, &name);
                        write_run_files(&config.out, &result, None).map(|_| result)
                    })
                    .collect::<anyhow::Result<Vec<_>>>()
            })?
        }
    };
    runs.sort_by(|a, b| a.summary.run_id.cmp(&b.summary.run_id));

    let failed = runs.iter().filter(|r| r.summary.error.is_some()).count();
    let summary = ExperimentSummary {
        problem: name,
        seed: config.seed,
        eps_bar: config.solver.eps_bar,
        delta_bar: config.solver.delta_bar,
        c: config.solver.c,
        t0: config.solver.t0,
        max_iters: config.solver.max_outer_iters,
        weight: config.problem.is_obstacle().then_some(DEFAULT_WEIGHT),
        completed: runs.len() - failed,
        failed,
        runs: runs.iter().map(|r| r.summary.clone()).collect(),
    };
    output::write_front(&config.out.join("front.csv"), &summary.runs)?;
    output::write_summary(&config.out.join("summary.json"), &summary)?;
    Ok(Experiment { summary, runs })
}
