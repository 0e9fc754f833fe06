//! The oracle interface a multiobjective problem exposes to the solver.

use crate::error::Result;
use crate::space::{Dual, InnerProductSpace, Primal};

/// A vector-valued objective `f = (f_1, …, f_k)` of locally Lipschitz
/// functions on a Hilbert space.
///
/// Implementations must be pure functions of their inputs: the same query
/// returns the same value and the same subderivative, so runs are
/// reproducible and can share one problem across threads.
pub trait MultiObjective: Sync {
    fn space(&self) -> &InnerProductSpace;

    fn num_objectives(&self) -> usize;

    /// All objective values at `x`.
    fn values(&self, x: &Primal) -> Result<Vec<f64>>;

    /// `f_i(x)` together with one element of the Clarke subdifferential
    /// `∂f_i(x)`.
    fn value_and_subgradient(&self, index: usize, x: &Primal) -> Result<(f64, Dual)>;
}

impl<P: MultiObjective + ?Sized> MultiObjective for &P {
    fn space(&self) -> &InnerProductSpace {
        (**self).space()
    }

    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }

    fn values(&self, x: &Primal) -> Result<Vec<f64>> {
        (**self).values(x)
    }

    fn value_and_subgradient(&self, index: usize, x: &Primal) -> Result<(f64, Dual)> {
        (**self).value_and_subgradient(index, x)
    }
}

/// Oracle call counters.
///
/// `values` counts calls to [`MultiObjective::values`] (one call evaluates
/// all `k` objectives); `subgradients` counts calls to
/// [`MultiObjective::value_and_subgradient`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub values: usize,
    pub subgradients: usize,
}

impl std::ops::AddAssign for EvalCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.values += rhs.values;
        self.subgradients += rhs.subgradients;
    }
}
