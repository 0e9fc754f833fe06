//! Randomized contract checks on convex max-affine and smooth test functions.

use nsmo_core::sampling::Segment;
use nsmo_core::solver::StepKind;
use nsmo_core::{
    compute_descent_direction, find_new_subderivative, solve, DirectionParams, DirectionStatus, Dual,
    InnerProductSpace, MultiObjective, Primal, Result, SamplingParams, SolverConfig,
};
use proptest::prelude::*;

/// Objectives `f_i(x) = max_k (a_ik · x + b_ik)` on a weighted space.
#[derive(Debug)]
struct MaxAffine {
    space: InnerProductSpace,
    pieces: Vec<Vec<(Vec<f64>, f64)>>,
}

impl MaxAffine {
    fn eval(&self, i: usize, x: &[f64]) -> (f64, Vec<f64>) {
        let mut best = f64::NEG_INFINITY;
        let mut grad = &self.pieces[i][0].0;
        for (a, b) in &self.pieces[i] {
            let v = a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b;
            if v > best {
                best = v;
                grad = a;
            }
        }
        (best, grad.clone())
    }
}

impl MultiObjective for MaxAffine {
    fn space(&self) -> &InnerProductSpace {
        &self.space
    }
    fn num_objectives(&self) -> usize {
        self.pieces.len()
    }
    fn values(&self, x: &Primal) -> Result<Vec<f64>> {
        Ok((0..self.pieces.len())
            .map(|i| self.eval(i, x.coeffs()).0)
            .collect())
    }
    fn value_and_subgradient(&self, i: usize, x: &Primal) -> Result<(f64, Dual)> {
        let (f, g) = self.eval(i, x.coeffs());
        Ok((f, Dual::new(g)))
    }
}

fn diagonal_space(weights: &[f64]) -> InnerProductSpace {
    let n = weights.len();
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { weights[i] } else { 0.0 }).collect())
        .collect::<Vec<Vec<f64>>>();
    InnerProductSpace::from_dense(&rows).unwrap()
}

fn max_affine() -> impl Strategy<Value = MaxAffine> {
    (2usize..4).prop_flat_map(|dim| {
        let piece = (prop::collection::vec(-3.0..3.0f64, dim), -1.0..1.0f64);
        let objective = prop::collection::vec(piece, 1..4);
        (
            prop::collection::vec(0.5..2.0f64, dim),
            prop::collection::vec(objective, 1..3),
        )
            .prop_map(|(w, pieces)| MaxAffine {
                space: diagonal_space(&w),
                pieces,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sampling_finds_a_separating_subderivative(
        prob in max_affine(),
        x in prop::collection::vec(-2.0..2.0f64, 3),
        eps in 0.05..3.0f64,
    ) {
        let dim = prob.space.dim();
        let x = Primal::new(x[..dim].to_vec());
        let c = 0.1;
        let fx = prob.eval(0, x.coeffs()).0;
        let params = SamplingParams::new(eps, c);
        let mut exercised = 0;
        // Any piece gradient may play the role of the current min-norm element.
        for (a, _) in &prob.pieces[0] {
            let xi = Dual::new(a.iter().map(|g| -g).collect());
            let v = prob.space.riesz_inv(&xi).unwrap();
            let norm = prob.space.norm(&v).unwrap();
            if norm < 1e-8 {
                continue;
            }
            let f_end = prob.eval(0, x.add_scaled(eps / norm, &v).coeffs()).0;
            // Only meaningful when the acceptance test fails.
            if f_end <= fx - c * eps * norm {
                continue;
            }
            exercised += 1;
            let seg = Segment { x: &x, fx, direction: &v, xi: &xi, f_end: Some(f_end) };
            let out = find_new_subderivative(&prob.space, &seg, &params, |p| {
                let (f, g) = prob.eval(0, p.coeffs());
                Ok((f, Dual::new(g)))
            })
            .unwrap();
            prop_assert!(out.t_found > 0.0 && out.t_found <= eps / norm * (1.0 + 1e-12));
            let at = prob.eval(0, x.add_scaled(out.t_found, &v).coeffs());
            prop_assert_eq!(out.xi_new.coeffs(), &at.1[..]);
            let pairing = prob.space.dual_inner(&xi, &out.xi_new).unwrap();
            prop_assert!(pairing > -c * norm * norm);
            prop_assert!(out.oracle_calls <= params.max_bisect);
        }
        prop_assume!(exercised > 0);
    }

    #[test]
    fn direction_satisfies_one_of_two_outcomes(
        prob in max_affine(),
        x in prop::collection::vec(-2.0..2.0f64, 3),
        eps in 1e-3..0.5f64,
        delta in 1e-4..1e-1f64,
    ) {
        let dim = prob.space.dim();
        let x = Primal::new(x[..dim].to_vec());
        let params = DirectionParams::new(eps, delta, 0.1);
        let d = compute_descent_direction(&prob, &x, &params).unwrap();
        for w in d.norm_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
        match d.status {
            DirectionStatus::CriticalWithinDelta => prop_assert!(d.norm <= delta),
            DirectionStatus::AcceptableDescent => {
                let trial = prob.values(&x.add_scaled(eps / d.norm, &d.v)).unwrap();
                for (ft, f0) in trial.iter().zip(&d.fx) {
                    prop_assert!(*ft <= f0 - 0.1 * eps * d.norm);
                }
            }
            DirectionStatus::SamplingFailed => prop_assert!(false, "sampling failed on a convex problem"),
        }
    }

    #[test]
    fn accepted_steps_decrease_every_objective(
        prob in max_affine(),
        x in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let dim = prob.space.dim();
        let x = Primal::new(x[..dim].to_vec());
        let cfg = SolverConfig { eps_bar: 1e-3, delta_bar: 1e-3, max_outer_iters: 2000, ..SolverConfig::default() };
        let rec = solve(&x, &cfg, &prob).unwrap();
        for w in rec.rows.windows(2) {
            let (now, next) = (&w[0], &w[1]);
            let Some(step) = now.step else { continue };
            if now.step_kind == Some(StepKind::Null) {
                prop_assert_eq!(&now.values, &next.values);
                continue;
            }
            for (f0, f1) in now.values.iter().zip(&next.values) {
                prop_assert!(*f1 <= f0 - cfg.c * step * now.v_norm * now.v_norm + 1e-12);
            }
        }
    }
}

#[test]
fn smooth_subderivative_matches_finite_differences() {
    // On a smooth problem the dual element returned by the oracle must be the
    // Fréchet derivative in the space's own pairing.
    let space = diagonal_space(&[2.0, 0.5]);
    let p = MaxAffine {
        space,
        pieces: vec![vec![(vec![1.0, -2.0], 0.5)]],
    };
    let x = Primal::new(vec![0.3, -0.7]);
    let (_, xi) = p.value_and_subgradient(0, &x).unwrap();
    let d = Primal::new(vec![0.4, 1.1]);
    let h = 1e-6;
    let fd = (p.values(&x.add_scaled(h, &d)).unwrap()[0] - p.values(&x.add_scaled(-h, &d)).unwrap()[0])
        / (2.0 * h);
    let pair = p.space().dual_pair(&xi, &d).unwrap();
    assert!((fd - pair).abs() < 1e-8);
}

#[test]
fn telescoping_bound_holds_for_constant_tolerances() {
    // Each non-terminal step lowers f by at least c ε̄ δ̄, so the number of
    // outer iterations is bounded by the initial gap to the infimum.
    let p = MaxAffine {
        space: InnerProductSpace::euclidean(2),
        pieces: vec![vec![
            (vec![1.0, 0.0], 0.0),
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, 1.0], 0.0),
            (vec![0.0, -1.0], 0.0),
        ]],
    };
    let cfg = SolverConfig {
        eps_bar: 1e-2,
        delta_bar: 1e-2,
        ..SolverConfig::default()
    };
    for start in [[3.0, -1.0], [0.5, 0.5], [-4.0, 2.0]] {
        let x = Primal::new(start.to_vec());
        let f0 = p.values(&x).unwrap()[0];
        let bound = (f0 / (cfg.c * cfg.eps_bar * cfg.delta_bar)).ceil() as usize + 1;
        let rec = solve(&x, &cfg, &p).unwrap();
        assert_eq!(rec.status, nsmo_core::RunStatus::EpsDeltaCritical);
        assert!(rec.iterations() <= bound);
    }
}
