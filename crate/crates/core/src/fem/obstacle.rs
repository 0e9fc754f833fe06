//! Optimal control of the obstacle problem as a bicriteria problem in the
//! control `u ∈ L²(Ω)`:
//!
//! ```text
//! J₁(u) = ½ ‖S(u) − y_d‖²,   J₂(u) = (C/2) ‖u − u_d‖²
//! ```
//!
//! where `S(u) = y` solves the discrete variational inequality
//! `min ½yᵀKy − (Mu)ᵀy` over `y ≤ ψ` (nodally), `y = 0` on `∂Ω`.

use std::sync::Arc;

use super::assembly::{assemble_operators, FemOperators};
use super::mesh::Mesh;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, SkylineCholesky};
use crate::problem::MultiObjective;
use crate::space::{Dual, InnerProductSpace, Primal};

pub const DEFAULT_WEIGHT: f64 = 1.5e-2;
const ACTIVE_SET_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObstacleKind {
    /// `ψ ≡ value`.
    Constant(f64),
    /// `1/3` on `x₁ ≤ 0 ∧ x₂ ≤ 0`, else `1` on `x₁ ≥ 0 ∧ x₂ ≥ 0`, else `2/3`.
    Piecewise,
}

/// Nodal interpolant of the obstacle. Cases of the piecewise obstacle are
/// tested in order, so the origin gets `1/3`.
pub fn make_obstacle(kind: ObstacleKind, mesh: &Mesh) -> Primal {
    let values = mesh
        .nodes()
        .iter()
        .map(|&[x1, x2]| match kind {
            ObstacleKind::Constant(c) => c,
            ObstacleKind::Piecewise => {
                if x1 <= 0.0 && x2 <= 0.0 {
                    1.0 / 3.0
                } else if x1 >= 0.0 && x2 >= 0.0 {
                    1.0
                } else {
                    2.0 / 3.0
                }
            }
        })
        .collect();
    Primal::new(values)
}

/// Solution of the discrete obstacle problem.
#[derive(Clone, Debug)]
pub struct ObstacleState {
    /// Nodal state, zero on the boundary.
    pub y: Primal,
    /// `y_i = ψ_i` enforced (interior nodes only).
    pub active: Vec<bool>,
    /// `Ky − Mu` on interior nodes, zero on boundary nodes.
    pub residual: Vec<f64>,
    pub iterations: usize,
}

impl ObstacleState {
    pub fn num_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

#[derive(Clone, Debug)]
pub struct ObstacleControlProblem {
    mesh: Arc<Mesh>,
    ops: Arc<FemOperators>,
    space: InnerProductSpace,
    psi: Primal,
    y_d: Primal,
    u_d: Primal,
    weight: f64,
    max_active_set_iters: usize,
}

impl ObstacleControlProblem {
    /// Builds the problem with `y_d ≡ 2`, `u_d ≡ 0`.
    pub fn new(mesh: Mesh, psi: Primal, weight: f64) -> Result<Self> {
        let n = mesh.num_nodes();
        Self::with_targets(mesh, psi, Primal::constant(n, 2.0), Primal::zeros(n), weight)
    }

    pub fn with_targets(mesh: Mesh, psi: Primal, y_d: Primal, u_d: Primal, weight: f64) -> Result<Self> {
        let n = mesh.num_nodes();
        check_dim(n, psi.dim())?;
        check_dim(n, y_d.dim())?;
        check_dim(n, u_d.dim())?;
        if !(weight > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight C must be positive, got {weight}"
            )));
        }
        // {y ≤ ψ, y|∂Ω = 0} is nonempty iff ψ ≥ 0 on the boundary.
        if let Some(i) = (0..n).find(|&i| mesh.boundary()[i] && psi.coeffs()[i] < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "obstacle is negative at boundary node {i}; admissible set is empty"
            )));
        }
        let ops = assemble_operators(&mesh)?;
        let space = InnerProductSpace::new(ops.mass.clone())?;
        let max_active_set_iters = 5 * ops.interior.len().max(1);
        Ok(Self {
            mesh: Arc::new(mesh),
            ops: Arc::new(ops),
            space,
            psi,
            y_d,
            u_d,
            weight,
            max_active_set_iters,
        })
    }

    pub fn from_h_max(h_max: f64, kind: ObstacleKind, weight: f64) -> Result<Self> {
        let mesh = super::build_mesh(h_max)?;
        let psi = make_obstacle(kind, &mesh);
        Self::new(mesh, psi, weight)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn operators(&self) -> &FemOperators {
        &self.ops
    }

    pub fn psi(&self) -> &Primal {
        &self.psi
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_nodes()
    }

    /// Discrete energy `½yᵀKy − (Mu)ᵀy` of a nodal state.
    pub fn energy(&self, y: &Primal, u: &Primal) -> Result<f64> {
        let ky = self.ops.stiffness_full.mul_vec(y.coeffs())?;
        let mu = self.ops.mass.mul_vec(u.coeffs())?;
        Ok(0.5 * dot(y.coeffs(), &ky) - dot(&mu, y.coeffs()))
    }

    /// Solves the obstacle problem by a primal–dual active-set iteration
    /// starting from the empty active set.
    pub fn solve_obstacle(&self, u: &Primal) -> Result<ObstacleState> {
        check_dim(self.dim(), u.dim())?;
        let ops = &*self.ops;
        let ni = ops.interior.len();
        let mu = ops.mass.mul_vec(u.coeffs())?;
        let rhs: Vec<f64> = ops.interior.iter().map(|&g| mu[g]).collect();
        let psi: Vec<f64> = ops.interior.iter().map(|&g| self.psi.coeffs()[g]).collect();

        let mut active = vec![false; ni];
        let mut y = vec![0.0; ni];
        let mut residual = vec![0.0; ni];
        let mut iterations = 0;
        loop {
            iterations += 1;
            if iterations > self.max_active_set_iters {
                return Err(Error::ActiveSetCycle(self.max_active_set_iters));
            }
            let free: Vec<usize> = (0..ni).filter(|&i| !active[i]).collect();
            for i in 0..ni {
                if active[i] {
                    y[i] = psi[i];
                }
            }
            if !free.is_empty() {
                // K_FF y_F = b_F − K_FA ψ_A
                let mut b_free = Vec::with_capacity(free.len());
                for &i in &free {
                    let coupling: f64 = ops
                        .stiffness
                        .row(i)
                        .filter(|&(j, _)| active[j])
                        .map(|(j, v)| v * psi[j])
                        .sum();
                    b_free.push(rhs[i] - coupling);
                }
                let k_ff = ops.stiffness.submatrix(&free, &free);
                let y_free = SkylineCholesky::factor(&k_ff)?.solve(&b_free)?;
                for (&i, v) in free.iter().zip(y_free) {
                    y[i] = v;
                }
            }
            let ky = ops.stiffness.mul_vec(&y)?;
            for i in 0..ni {
                residual[i] = ky[i] - rhs[i];
            }
            let next: Vec<bool> = (0..ni)
                .map(|i| {
                    if active[i] {
                        residual[i] <= ACTIVE_SET_TOL
                    } else {
                        y[i] > psi[i] + ACTIVE_SET_TOL
                    }
                })
                .collect();
            if next == active {
                break;
            }
            active = next;
        }

        let n = self.dim();
        let mut y_full = vec![0.0; n];
        let mut active_full = vec![false; n];
        let mut residual_full = vec![0.0; n];
        for (pos, &g) in ops.interior.iter().enumerate() {
            y_full[g] = y[pos];
            active_full[g] = active[pos];
            residual_full[g] = residual[pos];
        }
        Ok(ObstacleState {
            y: Primal::new(y_full),
            active: active_full,
            residual: residual_full,
            iterations,
        })
    }

    pub fn j1_from_state(&self, state: &ObstacleState) -> Result<f64> {
        let diff = state.y.add_scaled(-1.0, &self.y_d);
        Ok(0.5 * self.ops.mass.bilinear(diff.coeffs(), diff.coeffs())?)
    }

    pub fn j2(&self, u: &Primal) -> Result<f64> {
        check_dim(self.dim(), u.dim())?;
        let diff = u.add_scaled(-1.0, &self.u_d);
        Ok(0.5 * self.weight * self.ops.mass.bilinear(diff.coeffs(), diff.coeffs())?)
    }

    /// `(J₁(u), J₂(u))`.
    pub fn eval_objectives(&self, u: &Primal) -> Result<[f64; 2]> {
        let state = self.solve_obstacle(u)?;
        Ok([self.j1_from_state(&state)?, self.j2(u)?])
    }

    /// One Clarke subderivative of `J₁` at `u` from the adjoint equation on
    /// the strictly inactive interior nodes. Weak-contact nodes are treated
    /// as active.
    ///
    /// The returned functional is `v ↦ pᵀMv`, whose L² Riesz representative
    /// is the adjoint state `p`.
    pub fn subgrad_j1(&self, u: &Primal, state: &ObstacleState) -> Result<Dual> {
        check_dim(self.dim(), u.dim())?;
        check_dim(self.dim(), state.y.dim())?;
        if state.active.len() != self.dim() {
            return Err(Error::InvalidArgument(
                "state does not belong to this problem".into(),
            ));
        }
        let ops = &*self.ops;
        let psi = self.psi.coeffs();
        let y = state.y.coeffs();
        let inactive: Vec<usize> = (0..ops.interior.len())
            .filter(|&pos| {
                let g = ops.interior[pos];
                !state.active[g] && y[g] < psi[g] - ACTIVE_SET_TOL
            })
            .collect();
        let mut p = vec![0.0; self.dim()];
        if !inactive.is_empty() {
            let diff = state.y.add_scaled(-1.0, &self.y_d);
            let md = ops.mass.mul_vec(diff.coeffs())?;
            let b: Vec<f64> = inactive.iter().map(|&pos| md[ops.interior[pos]]).collect();
            let k = ops.stiffness.submatrix(&inactive, &inactive);
            let p_inactive = SkylineCholesky::factor(&k)?.solve(&b)?;
            for (&pos, v) in inactive.iter().zip(p_inactive) {
                p[ops.interior[pos]] = v;
            }
        }
        Ok(Dual::new(ops.mass.mul_vec(&p)?))
    }

    /// The gradient of `J₂`: `C M (u − u_d)`.
    pub fn subgrad_j2(&self, u: &Primal) -> Result<Dual> {
        check_dim(self.dim(), u.dim())?;
        let diff = u.add_scaled(-1.0, &self.u_d);
        let g = self.ops.mass.mul_vec(diff.coeffs())?;
        Ok(Dual::new(g.into_iter().map(|v| self.weight * v).collect()))
    }
}

impl MultiObjective for ObstacleControlProblem {
    fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn values(&self, x: &Primal) -> Result<Vec<f64>> {
        Ok(self.eval_objectives(x)?.to_vec())
    }

    fn value_and_subgradient(&self, index: usize, x: &Primal) -> Result<(f64, Dual)> {
        match index {
            0 => {
                let state = self.solve_obstacle(x)?;
                Ok((self.j1_from_state(&state)?, self.subgrad_j1(x, &state)?))
            }
            1 => Ok((self.j2(x)?, self.subgrad_j2(x)?)),
            _ => Err(Error::InvalidArgument(format!(
                "objective index {index} out of range"
            ))),
        }
    }
}
