//! Minimum-norm element of the (negated) convex hull of finitely many dual
//! vectors.
//!
//! Minimizing `‖Σ λ_i ξ_i‖²_*` over the unit simplex is the quadratic program
//! `min λᵀGλ` with the Gram matrix `G_ij = ⟨ξ_i, ξ_j⟩_*`. It is solved by
//! Wolfe's minimum-norm-point algorithm written entirely in terms of `G`,
//! with a pairwise Frank–Wolfe polish as fallback when the corral becomes
//! numerically affinely dependent.
//!
//! The returned weights always satisfy the optimality certificate
//! `(Gλ)_i ≥ λᵀGλ − tol` for every generator, i.e.
//! `⟨ξ̃, ξ_i⟩_* ≤ −‖ξ̃‖²_* + tol` for `ξ̃ = −Σ λ_i ξ_i`.

use crate::error::{Error, Result};
use crate::space::{Dual, InnerProductSpace};

#[derive(Clone, Debug)]
pub struct MinNormResult {
    /// `−Σ λ_i ξ_i`, the minimizer over `−conv(Ξ)`.
    pub xi_tilde: Dual,
    pub lambda: Vec<f64>,
    pub norm_sq: f64,
}

/// Solution of `min λᵀGλ` over the unit simplex.
#[derive(Clone, Debug)]
pub struct SimplexQpSolution {
    pub weights: Vec<f64>,
    pub value: f64,
    /// `λᵀGλ − min_i (Gλ)_i`; non-positive up to `tol` on success.
    pub gap: f64,
    pub iterations: usize,
}

/// `1e-12 · (1 + max_i G_ii)`.
pub fn default_tol(gram: &[Vec<f64>]) -> f64 {
    let max_diag = gram
        .iter()
        .enumerate()
        .fold(0.0_f64, |m, (i, row)| m.max(row[i].abs()));
    1e-12 * (1.0 + max_diag)
}

pub fn iteration_cap(m: usize) -> usize {
    10 * m * m + 100
}

/// Minimum-norm point of `−conv(xis)` in the dual norm of `space`.
///
/// `tol` defaults to [`default_tol`] of the generator Gram matrix.
pub fn min_norm_point(space: &InnerProductSpace, xis: &[Dual], tol: Option<f64>) -> Result<MinNormResult> {
    if xis.is_empty() {
        return Err(Error::InvalidArgument("empty generator set".into()));
    }
    let reps = xis
        .iter()
        .map(|xi| space.riesz_inv(xi))
        .collect::<Result<Vec<_>>>()?;
    let m = xis.len();
    let mut gram = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let a = space.dual_pair(&xis[i], &reps[j])?;
            let b = space.dual_pair(&xis[j], &reps[i])?;
            gram[i][j] = 0.5 * (a + b);
            gram[j][i] = gram[i][j];
        }
    }
    let tol = tol.unwrap_or_else(|| default_tol(&gram));
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let qp = solve_simplex_qp(&gram, tol)?;
    let mut coeffs = vec![0.0; space.dim()];
    for (xi, &w) in xis.iter().zip(&qp.weights) {
        if w != 0.0 {
            for (c, g) in coeffs.iter_mut().zip(xi.coeffs()) {
                *c -= w * g;
            }
        }
    }
    Ok(MinNormResult {
        xi_tilde: Dual::new(coeffs),
        lambda: qp.weights,
        norm_sq: qp.value,
    })
}

/// Minimizes `λᵀGλ` over the unit simplex for a symmetric positive
/// semidefinite `gram`.
pub fn solve_simplex_qp(gram: &[Vec<f64>], tol: f64) -> Result<SimplexQpSolution> {
    let m = gram.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty generator set".into()));
    }
    if gram.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidArgument("Gram matrix must be square".into()));
    }
    let g: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| 0.5 * (gram[i][j] + gram[j][i])).collect())
        .collect();

    let cap = iteration_cap(m);
    let mut qp = Wolfe::new(&g);
    let mut iterations = 0;
    let converged = loop {
        let (gap, best) = qp.certificate();
        if gap <= tol {
            break true;
        }
        if qp.in_corral(best) {
            // Stalled: the most violating vertex is already in the corral.
            break false;
        }
        match qp.add_vertex(best, &mut iterations, cap)? {
            Step::Continue => {}
            Step::Degenerate => break false,
        }
    };

    let mut weights = qp.weights;
    if !converged {
        iterations += pairwise_polish(&g, &mut weights, tol, 100 * cap);
    }
    normalize(&mut weights);
    let (value, gap) = objective_and_gap(&g, &weights);
    if gap > tol {
        return Err(Error::MinNormNotConverged {
            iterations,
            gap,
            best_weights: weights,
        });
    }
    Ok(SimplexQpSolution {
        weights,
        value,
        gap,
        iterations,
    })
}

enum Step {
    Continue,
    Degenerate,
}

struct Wolfe<'a> {
    g: &'a [Vec<f64>],
    weights: Vec<f64>,
    corral: Vec<usize>,
}

impl<'a> Wolfe<'a> {
    fn new(g: &'a [Vec<f64>]) -> Self {
        let m = g.len();
        let start = (0..m).min_by(|&a, &b| g[a][a].total_cmp(&g[b][b])).unwrap_or(0);
        let mut weights = vec![0.0; m];
        weights[start] = 1.0;
        Self {
            g,
            weights,
            corral: vec![start],
        }
    }

    fn in_corral(&self, j: usize) -> bool {
        self.corral.contains(&j)
    }

    /// Returns the certificate gap and the most violating vertex.
    fn certificate(&self) -> (f64, usize) {
        let grad = mul(self.g, &self.weights);
        let value = dot(&self.weights, &grad);
        let (best, min) = grad
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        (value - min, best)
    }

    /// Inserts vertex `j` and runs the minor cycle until the weights are the
    /// affine minimizer of a corral with strictly positive weights.
    fn add_vertex(&mut self, j: usize, iterations: &mut usize, cap: usize) -> Result<Step> {
        self.corral.push(j);
        loop {
            *iterations += 1;
            if *iterations > cap {
                let (gap, _) = self.certificate();
                return Err(Error::MinNormNotConverged {
                    iterations: *iterations,
                    gap,
                    best_weights: self.weights.clone(),
                });
            }
            let Some(mu) = affine_minimizer(self.g, &self.corral) else {
                self.corral.pop();
                return Ok(Step::Degenerate);
            };
            if mu.iter().all(|&w| w > 0.0) {
                for (&s, &w) in self.corral.iter().zip(&mu) {
                    self.weights[s] = w;
                }
                return Ok(Step::Continue);
            }
            // Move towards mu until the first weight hits zero.
            let mut theta = f64::INFINITY;
            let mut leaving = 0;
            for (k, (&s, &w)) in self.corral.iter().zip(&mu).enumerate() {
                if w <= 0.0 {
                    let lam = self.weights[s];
                    let ratio = if lam > 0.0 { lam / (lam - w) } else { 0.0 };
                    if ratio < theta {
                        theta = ratio;
                        leaving = k;
                    }
                }
            }
            if theta <= 0.0 {
                // The entering vertex cannot carry weight: round-off has made
                // the corral affinely dependent.
                self.corral.retain(|&s| s != j);
                return Ok(Step::Degenerate);
            }
            for (&s, &w) in self.corral.iter().zip(&mu) {
                self.weights[s] = (1.0 - theta) * self.weights[s] + theta * w;
            }
            self.weights[self.corral[leaving]] = 0.0;
            let weights = &mut self.weights;
            self.corral.retain(|&s| {
                if weights[s] <= 0.0 {
                    weights[s] = 0.0;
                    false
                } else {
                    true
                }
            });
            if self.corral.is_empty() {
                return Ok(Step::Degenerate);
            }
        }
    }
}

/// Minimizer of `μᵀG_SSμ` subject to `Σμ = 1`, from the bordered KKT system.
fn affine_minimizer(g: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let n = corral.len();
    if n == 1 {
        return Some(vec![1.0]);
    }
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[r][c] = g[i][j];
        }
        a[r][n] = 1.0;
        a[n][r] = 1.0;
    }
    let mut b = vec![0.0; n + 1];
    b[n] = 1.0;
    let mut sol = crate::linalg::solve_dense(a, b)?;
    sol.truncate(n);
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

/// Pairwise Frank–Wolfe with exact line search; returns iterations used.
fn pairwise_polish(g: &[Vec<f64>], weights: &mut [f64], tol: f64, max_iter: usize) -> usize {
    for it in 0..max_iter {
        let grad = mul(g, weights);
        let value = dot(weights, &grad);
        let toward = argmin(&grad);
        let away = (0..weights.len())
            .filter(|&i| weights[i] > 0.0)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]))
            .unwrap_or(toward);
        if value - grad[toward] <= tol || toward == away {
            return it;
        }
        let slope = grad[toward] - grad[away];
        let curvature = g[toward][toward] - 2.0 * g[toward][away] + g[away][away];
        let max_step = weights[away];
        let step = if curvature > 0.0 {
            (-slope / curvature).min(max_step)
        } else {
            max_step
        };
        if !(step > 0.0) {
            return it;
        }
        weights[toward] += step;
        weights[away] -= step;
        if weights[away] < 0.0 || step == max_step {
            weights[away] = 0.0;
        }
    }
    max_iter
}

fn normalize(weights: &mut [f64]) {
    for w in weights.iter_mut() {
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 {
        for w in weights.iter_mut() {
            *w /= sum;
        }
    }
}

fn objective_and_gap(g: &[Vec<f64>], weights: &[f64]) -> (f64, f64) {
    let grad = mul(g, weights);
    let value = dot(weights, &grad);
    let min = grad.iter().copied().fold(f64::INFINITY, f64::min);
    (value.max(0.0), value - min)
}

fn mul(g: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    g.iter().map(|row| dot(row, x)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dot(a, b)
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}
