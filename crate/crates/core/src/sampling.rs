//! Bisection search for a new subderivative of an objective whose decrease
//! along the current direction is insufficient.
//!
//! Along the segment `x + t ṽ`, `t ∈ (0, ε/‖ṽ‖]`, the merit function
//! `h(t) = f(x + tṽ) − f(x) + c t ‖ṽ‖²` is positive at the right end point
//! and zero at `t = 0`. Bisection keeps a bracket `[a, b]` on which `h`
//! increases and probes its midpoint until the subderivative found there
//! satisfies `⟨ξ̃, ξ'⟩_* > −c ‖ξ̃‖²_*`, i.e. it is not yet represented in
//! the current hull.

use crate::error::{Error, Result};
use crate::space::{Dual, InnerProductSpace, Primal};

pub const DEFAULT_MAX_BISECT: usize = 60;

#[derive(Clone, Copy, Debug)]
pub struct SamplingParams {
    pub eps: f64,
    pub c: f64,
    pub max_bisect: usize,
}

impl SamplingParams {
    pub fn new(eps: f64, c: f64) -> Self {
        Self {
            eps,
            c,
            max_bisect: DEFAULT_MAX_BISECT,
        }
    }
}

/// The segment being searched.
#[derive(Clone, Copy, Debug)]
pub struct Segment<'a> {
    pub x: &'a Primal,
    /// `f_i(x)`.
    pub fx: f64,
    /// The candidate direction `ṽ = R⁻¹ξ̃`.
    pub direction: &'a Primal,
    /// `ξ̃`, the current min-norm element.
    pub xi: &'a Dual,
    /// `f_i(x + (ε/‖ṽ‖) ṽ)` if already known.
    pub f_end: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SamplingOutcome {
    pub xi_new: Dual,
    pub t_found: f64,
    /// `f_i` at `x + t_found ṽ`.
    pub value: f64,
    pub oracle_calls: usize,
}

/// Searches for `ξ' ∈ ∂f_i(x + t'ṽ)`, `t' ∈ (0, ε/‖ṽ‖]`, with
/// `⟨ξ̃, ξ'⟩_* > −c ‖ξ̃‖²_*`.
///
/// `oracle` returns `f_i` and one subderivative of `f_i` at a point. If
/// `segment.f_end` is `None` one extra oracle call evaluates the right end
/// point. After `max_bisect` probes without success the last candidate is
/// returned inside [`Error::SamplingFailed`].
pub fn find_new_subderivative<F>(
    space: &InnerProductSpace,
    segment: &Segment<'_>,
    params: &SamplingParams,
    mut oracle: F,
) -> Result<SamplingOutcome>
where
    F: FnMut(&Primal) -> Result<(f64, Dual)>,
{
    let SamplingParams { eps, c, max_bisect } = *params;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("c must lie in (0, 1), got {c}")));
    }
    let v = segment.direction;
    // ⟨ξ̃, ξ⟩_* = ξ(R⁻¹ξ̃) = ξ(ṽ), so no Gram solves are needed here.
    let norm_sq = space.dual_pair(segment.xi, v)?;
    let v_norm = space.norm(v)?;
    if !(v_norm > 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let threshold = -c * norm_sq;
    let merit = |t: f64, ft: f64| ft - segment.fx + c * t * v_norm * v_norm;

    let mut calls = 0;
    let mut a = 0.0;
    let mut b = eps / v_norm;
    let f_end = match segment.f_end {
        Some(f) => f,
        None => {
            calls += 1;
            oracle(&segment.x.add_scaled(b, v))?.0
        }
    };
    let mut h_b = merit(b, f_end);

    let mut last = None;
    for _ in 0..max_bisect {
        let t = 0.5 * (a + b);
        let (ft, xi_new) = oracle(&segment.x.add_scaled(t, v))?;
        calls += 1;
        if space.dual_pair(&xi_new, v)? > threshold {
            return Ok(SamplingOutcome {
                xi_new,
                t_found: t,
                value: ft,
                oracle_calls: calls,
            });
        }
        let h_t = merit(t, ft);
        if h_b > h_t {
            a = t;
        } else {
            b = t;
            h_b = h_t;
        }
        last = Some((t, xi_new));
    }
    let (last_t, last_xi) = last.unwrap_or((b, Dual::zeros(space.dim())));
    Err(Error::SamplingFailed {
        last_t,
        last_xi: last_xi.into_coeffs(),
        oracle_calls: calls,
    })
}
