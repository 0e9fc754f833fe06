//! Common descent directions from a sampled approximation of the
//! multiobjective Goldstein ε-subdifferential.
//!
//! Starting from one subderivative per objective at `x`, the sampled set `Ξ`
//! is enriched until the min-norm element `ξ` of `−conv(Ξ)` either has
//! `‖ξ‖_* ≤ δ`, or its Riesz representative `v` decreases every objective by
//! at least `c ε ‖v‖` over a step of length `ε`.

use crate::error::{Error, Result};
use crate::minnorm::{default_tol, solve_simplex_qp};
use crate::problem::{EvalCounts, MultiObjective};
use crate::sampling::{find_new_subderivative, SamplingParams, Segment, DEFAULT_MAX_BISECT};
use crate::space::{Dual, InnerProductSpace, Primal};

pub const DEFAULT_MAX_INNER: usize = 500;

#[derive(Clone, Copy, Debug)]
pub struct DirectionParams {
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub max_inner: usize,
    pub max_bisect: usize,
}

impl DirectionParams {
    pub fn new(eps: f64, delta: f64, c: f64) -> Self {
        Self {
            eps,
            delta,
            c,
            max_inner: DEFAULT_MAX_INNER,
            max_bisect: DEFAULT_MAX_BISECT,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps and delta must be positive (eps = {}, delta = {})",
                self.eps, self.delta
            )));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "c must lie in (0, 1), got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionStatus {
    /// `‖ξ‖_* ≤ δ`.
    CriticalWithinDelta,
    /// Every objective decreases sufficiently along `v`.
    AcceptableDescent,
    /// Subderivative sampling or the inner iteration cap gave up; `v` is the
    /// best direction found.
    SamplingFailed,
}

#[derive(Clone, Debug)]
pub struct DirectionResult {
    pub v: Primal,
    pub xi: Dual,
    /// `‖ξ‖_* = ‖v‖`.
    pub norm: f64,
    pub status: DirectionStatus,
    /// Final `|Ξ|`.
    pub xi_set_size: usize,
    pub inner_iters: usize,
    pub evals: EvalCounts,
    /// `‖ξ_l‖_*` for every inner iteration.
    pub norm_history: Vec<f64>,
    /// Objective values at `x`.
    pub fx: Vec<f64>,
    /// Objective values at `x + (ε/‖v‖) v` from the last acceptance test.
    pub f_trial: Option<Vec<f64>>,
}

/// Sampled hull with cached Riesz representatives and Gram matrix.
struct SampledSet<'a> {
    space: &'a InnerProductSpace,
    xis: Vec<Dual>,
    reps: Vec<Primal>,
    gram: Vec<Vec<f64>>,
}

impl<'a> SampledSet<'a> {
    fn new(space: &'a InnerProductSpace) -> Self {
        Self {
            space,
            xis: Vec::new(),
            reps: Vec::new(),
            gram: Vec::new(),
        }
    }

    fn push(&mut self, xi: Dual) -> Result<()> {
        let rep = self.space.riesz_inv(&xi)?;
        let mut row = Vec::with_capacity(self.xis.len() + 1);
        for (other, other_rep) in self.xis.iter().zip(&self.reps) {
            let a = self.space.dual_pair(&xi, other_rep)?;
            let b = self.space.dual_pair(other, &rep)?;
            row.push(0.5 * (a + b));
        }
        row.push(self.space.dual_pair(&xi, &rep)?);
        for (g, &v) in self.gram.iter_mut().zip(&row) {
            g.push(v);
        }
        self.gram.push(row);
        self.xis.push(xi);
        self.reps.push(rep);
        Ok(())
    }

    fn len(&self) -> usize {
        self.xis.len()
    }

    /// `(ξ, v) = (−Σλ_i ξ_i, −Σλ_i R⁻¹ξ_i)` for the min-norm weights.
    fn min_norm(&self) -> Result<(Dual, Primal)> {
        let qp = solve_simplex_qp(&self.gram, default_tol(&self.gram))?;
        let dim = self.space.dim();
        let mut xi = vec![0.0; dim];
        let mut v = vec![0.0; dim];
        for ((g, r), &w) in self.xis.iter().zip(&self.reps).zip(&qp.weights) {
            if w == 0.0 {
                continue;
            }
            for (acc, gi) in xi.iter_mut().zip(g.coeffs()) {
                *acc -= w * gi;
            }
            for (acc, ri) in v.iter_mut().zip(r.coeffs()) {
                *acc -= w * ri;
            }
        }
        Ok((Dual::new(xi), Primal::new(v)))
    }
}

/// Computes a common descent direction at `x`.
pub fn compute_descent_direction<P>(
    problem: &P,
    x: &Primal,
    params: &DirectionParams,
) -> Result<DirectionResult>
where
    P: MultiObjective + ?Sized,
{
    params.validate()?;
    let space = problem.space();
    let k = problem.num_objectives();
    if k == 0 {
        return Err(Error::InvalidArgument("problem has no objectives".into()));
    }
    let DirectionParams { eps, delta, c, .. } = *params;
    let mut evals = EvalCounts::default();

    let mut set = SampledSet::new(space);
    let mut fx = Vec::with_capacity(k);
    for i in 0..k {
        let (f, xi) = problem.value_and_subgradient(i, x)?;
        evals.subgradients += 1;
        fx.push(f);
        set.push(xi)?;
    }

    let mut norm_history = Vec::new();
    let mut inner_iters = 0;
    loop {
        inner_iters += 1;
        let (xi, v) = set.min_norm()?;
        let norm = space.dual_pair(&xi, &v)?.max(0.0).sqrt();
        norm_history.push(norm);
        let mut result = DirectionResult {
            v,
            xi,
            norm,
            status: DirectionStatus::CriticalWithinDelta,
            xi_set_size: set.len(),
            inner_iters,
            evals,
            norm_history: Vec::new(),
            fx: fx.clone(),
            f_trial: None,
        };
        if norm <= delta {
            result.norm_history = norm_history;
            return Ok(result);
        }

        let step = eps / norm;
        let trial = x.add_scaled(step, &result.v);
        let f_trial = problem.values(&trial)?;
        evals.values += 1;
        result.evals = evals;
        let insufficient: Vec<usize> = (0..k).filter(|&j| f_trial[j] > fx[j] - c * eps * norm).collect();
        result.f_trial = Some(f_trial.clone());
        if insufficient.is_empty() {
            result.status = DirectionStatus::AcceptableDescent;
            result.norm_history = norm_history;
            return Ok(result);
        }
        if inner_iters >= params.max_inner {
            result.status = DirectionStatus::SamplingFailed;
            result.norm_history = norm_history;
            return Ok(result);
        }

        let sampling = SamplingParams {
            eps,
            c,
            max_bisect: params.max_bisect,
        };
        let threshold = -c * norm * norm;
        let mut fresh = Vec::with_capacity(insufficient.len());
        for &j in &insufficient {
            let segment = Segment {
                x,
                fx: fx[j],
                direction: &result.v,
                xi: &result.xi,
                f_end: Some(f_trial[j]),
            };
            let mut calls = 0;
            let outcome = find_new_subderivative(space, &segment, &sampling, |y| {
                calls += 1;
                problem.value_and_subgradient(j, y)
            });
            evals.subgradients += calls;
            match outcome {
                Ok(found) if space.dual_pair(&found.xi_new, &result.v)? > threshold => {
                    fresh.push(found.xi_new);
                }
                Ok(_) | Err(Error::SamplingFailed { .. }) => {
                    result.status = DirectionStatus::SamplingFailed;
                    result.evals = evals;
                    result.norm_history = norm_history;
                    return Ok(result);
                }
                Err(e) => return Err(e),
            }
        }
        for xi in fresh {
            set.push(xi)?;
        }
    }
}
