//! The outer descent loop: common descent direction, Armijo backtracking and
//! `(ε̄, δ̄)`-criticality stopping, with a per-iteration trace.

use std::time::{Duration, Instant};

use crate::direction::{compute_descent_direction, DirectionParams, DirectionStatus, DEFAULT_MAX_INNER};
use crate::error::{Error, Result};
use crate::problem::{EvalCounts, MultiObjective};
use crate::sampling::DEFAULT_MAX_BISECT;
use crate::space::Primal;

/// Tolerance sequences `(ε_j, δ_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `ε_j ≡ ε̄`, `δ_j ≡ δ̄`.
    Constant,
    /// `ε_j = ε₀/√j`, `δ_j = δ₀/√j`: both vanish and `Σ ε_j δ_j = ε₀δ₀ Σ 1/j`
    /// diverges.
    InverseSqrt { eps0: f64, delta0: f64 },
}

impl Schedule {
    /// Tolerances for outer iteration `j ≥ 1`.
    pub fn tolerances(&self, j: usize, eps_bar: f64, delta_bar: f64) -> (f64, f64) {
        match *self {
            Schedule::Constant => (eps_bar, delta_bar),
            Schedule::InverseSqrt { eps0, delta0 } => {
                let s = (j.max(1) as f64).sqrt();
                (eps0 / s, delta0 / s)
            }
        }
    }

    /// Whether the sequences tend to zero with `Σ ε_j δ_j = ∞`, the
    /// hypotheses under which accumulation points are Pareto critical.
    pub fn is_convergent_mode(&self) -> bool {
        matches!(self, Schedule::InverseSqrt { .. })
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub eps_bar: f64,
    pub delta_bar: f64,
    pub schedule: Schedule,
    /// Armijo parameter in `(0, 1)`.
    pub c: f64,
    /// Initial trial step of the backtracking line search.
    pub t0: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub max_bisect: usize,
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_bar: 1e-4,
            delta_bar: 1e-4,
            schedule: Schedule::Constant,
            c: 0.1,
            t0: 1.0,
            max_outer_iters: 10_000,
            max_inner_iters: DEFAULT_MAX_INNER,
            max_bisect: DEFAULT_MAX_BISECT,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.eps_bar >= 0.0 && self.delta_bar >= 0.0) {
            return bad(format!(
                "eps_bar and delta_bar must be non-negative ({}, {})",
                self.eps_bar, self.delta_bar
            ));
        }
        match self.schedule {
            Schedule::Constant if !(self.eps_bar > 0.0 && self.delta_bar > 0.0) => {
                return bad("constant schedule needs positive eps_bar and delta_bar".into());
            }
            Schedule::InverseSqrt { eps0, delta0 } if !(eps0 > 0.0 && delta0 > 0.0) => {
                return bad("schedule scales must be positive".into());
            }
            _ => {}
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c must lie in (0, 1), got {}", self.c));
        }
        if !(self.t0 > 0.0) {
            return bad(format!("t0 must be positive, got {}", self.t0));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// `t̄ = 2^{-s̄} t₀` from a successful Armijo test.
    Armijo,
    /// `t̄ = ε_j/‖v_j‖`, the lower clamp.
    Floor,
    /// No step: the direction was δ_j-small but the stopping test did not
    /// fire (only possible with a non-constant schedule).
    Null,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    EpsDeltaCritical,
    MaxIters,
    SamplingFailed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::EpsDeltaCritical => "EpsDeltaCritical",
            RunStatus::MaxIters => "MaxIters",
            RunStatus::SamplingFailed => "SamplingFailed",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One outer iteration.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iter: usize,
    pub eps: f64,
    pub delta: f64,
    /// `f(x_j)`.
    pub values: Vec<f64>,
    /// `‖v_j‖`.
    pub v_norm: f64,
    /// `t̄_j`, absent on the terminating iteration.
    pub step: Option<f64>,
    pub step_kind: Option<StepKind>,
    pub direction_status: DirectionStatus,
    pub xi_set_size: usize,
    pub inner_iters: usize,
    pub func_evals: usize,
    pub subgrad_evals: usize,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    pub x: Primal,
    /// `f` at the returned point.
    pub final_values: Vec<f64>,
    /// `‖v‖` of the last computed direction.
    pub final_direction_norm: f64,
    pub wall_time: Duration,
    /// `x_j` per row, when requested.
    pub iterates: Option<Vec<Primal>>,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn max_xi_set_size(&self) -> usize {
        self.rows.iter().map(|r| r.xi_set_size).max().unwrap_or(0)
    }

    pub fn total_evals(&self) -> EvalCounts {
        let mut total = EvalCounts::default();
        for r in &self.rows {
            total += EvalCounts {
                values: r.func_evals,
                subgradients: r.subgrad_evals,
            };
        }
        total
    }
}

#[derive(Clone, Debug)]
pub struct ArmijoOutcome {
    pub step: f64,
    pub kind: StepKind,
    /// Number of backtracking trials evaluated.
    pub trials: usize,
}

/// Backtracking line search: the largest `2^{-s} t₀` with
/// `f_i(x + 2^{-s} t₀ v) ≤ f_i(x) − 2^{-s} c t₀ ‖v‖²` for all `i`, clamped
/// below by `ε_j/‖v‖`.
///
/// Trials stop as soon as `2^{-s} t₀ < ε_j/‖v‖`, since the clamp makes any
/// smaller step irrelevant.
pub fn armijo_step<P>(
    problem: &P,
    x: &Primal,
    fx: &[f64],
    v: &Primal,
    eps_j: f64,
    c: f64,
    t0: f64,
) -> Result<ArmijoOutcome>
where
    P: MultiObjective + ?Sized,
{
    let v_norm = problem.space().norm(v)?;
    if !(v_norm > 0.0) {
        return Err(Error::InvalidArgument(
            "line search needs a nonzero direction".into(),
        ));
    }
    let floor = eps_j / v_norm;
    let decrease = c * v_norm * v_norm;
    let mut tau = t0;
    let mut trials = 0;
    while tau >= floor {
        let values = problem.values(&x.add_scaled(tau, v))?;
        trials += 1;
        if values.iter().zip(fx).all(|(ft, f0)| *ft <= f0 - tau * decrease) {
            return Ok(ArmijoOutcome {
                step: tau,
                kind: StepKind::Armijo,
                trials,
            });
        }
        tau *= 0.5;
    }
    Ok(ArmijoOutcome {
        step: floor,
        kind: StepKind::Floor,
        trials,
    })
}

/// Runs the descent method from `x1`.
///
/// Oracle errors abort the run; caps and sampling failures end it with the
/// corresponding [`RunStatus`] and a complete trace.
pub fn solve<P>(x1: &Primal, config: &SolverConfig, problem: &P) -> Result<RunRecord>
where
    P: MultiObjective + ?Sized,
{
    config.validate()?;
    crate::error::check_dim(problem.space().dim(), x1.dim())?;
    let start = Instant::now();
    let mut x = x1.clone();
    let mut rows = Vec::new();
    let mut iterates = config.record_iterates.then(Vec::new);
    let mut status = RunStatus::MaxIters;
    let mut final_values = None;
    let mut final_norm = f64::NAN;

    for j in 1..=config.max_outer_iters {
        let (eps_j, delta_j) = config.schedule.tolerances(j, config.eps_bar, config.delta_bar);
        let params = DirectionParams {
            eps: eps_j,
            delta: delta_j,
            c: config.c,
            max_inner: config.max_inner_iters,
            max_bisect: config.max_bisect,
        };
        let dir = compute_descent_direction(problem, &x, &params)?;
        final_norm = dir.norm;
        if let Some(it) = iterates.as_mut() {
            it.push(x.clone());
        }
        let mut row = TraceRow {
            iter: j,
            eps: eps_j,
            delta: delta_j,
            values: dir.fx.clone(),
            v_norm: dir.norm,
            step: None,
            step_kind: None,
            direction_status: dir.status,
            xi_set_size: dir.xi_set_size,
            inner_iters: dir.inner_iters,
            func_evals: dir.evals.values,
            subgrad_evals: dir.evals.subgradients,
        };

        if dir.status == DirectionStatus::SamplingFailed {
            rows.push(row);
            final_values = Some(dir.fx);
            status = RunStatus::SamplingFailed;
            break;
        }
        if dir.norm <= config.delta_bar && eps_j <= config.eps_bar {
            rows.push(row);
            final_values = Some(dir.fx);
            status = RunStatus::EpsDeltaCritical;
            break;
        }
        if dir.status == DirectionStatus::CriticalWithinDelta {
            row.step = Some(0.0);
            row.step_kind = Some(StepKind::Null);
            rows.push(row);
            continue;
        }

        let ls = armijo_step(problem, &x, &dir.fx, &dir.v, eps_j, config.c, config.t0)?;
        row.func_evals += ls.trials;
        row.step = Some(ls.step);
        row.step_kind = Some(ls.kind);
        rows.push(row);
        x = x.add_scaled(ls.step, &dir.v);
    }

    let final_values = match final_values {
        Some(v) => v,
        None => problem.values(&x)?,
    };
    Ok(RunRecord {
        rows,
        status,
        x,
        final_values,
        final_direction_norm: final_norm,
        wall_time: start.elapsed(),
        iterates,
    })
}
