//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use nsmo_cli::args::RunArgs;
use nsmo_cli::{run_experiment, Experiment};
use nsmo_core::analytic::AnalyticProblem;
use nsmo_core::fem::{assemble_operators, build_mesh, ObstacleControlProblem, ObstacleKind, DEFAULT_WEIGHT};
use nsmo_core::minnorm::{default_tol, min_norm_point};
use nsmo_core::solver::StepKind;
use nsmo_core::{
    compute_descent_direction, solve, DirectionParams, DirectionStatus, Dual, InnerProductSpace,
    MultiObjective, Primal, RunRecord, RunStatus, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Traces collected by earlier criteria for the common-descent check.
#[derive(Default)]
struct Traces {
    runs: Vec<(String, usize, RunRecord)>,
}

impl Traces {
    fn push(&mut self, label: String, num_objectives: usize, record: RunRecord) {
        self.runs.push((label, num_objectives, record));
    }
}

// Dense helpers kept independent of the library's own linear algebra.

fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &v)| {
            let mut r = r.clone();
            r.push(v);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            let (upper, lower) = m.split_at_mut(row);
            for (t, s) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= f * s;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

fn quad(q: &[Vec<f64>], l: &[f64]) -> f64 {
    (0..l.len())
        .map(|i| (0..l.len()).map(|j| l[i] * q[i][j] * l[j]).sum::<f64>())
        .sum()
}

/// Exhaustive grid over the simplex with `n` subdivisions per edge.
fn grid_min(q: &[Vec<f64>], n: usize) -> f64 {
    let m = q.len();
    let mut best = f64::INFINITY;
    match m {
        1 => best = q[0][0],
        2 => {
            for a in 0..=n {
                let l = [a as f64 / n as f64, (n - a) as f64 / n as f64];
                best = best.min(quad(q, &l));
            }
        }
        3 => {
            for a in 0..=n {
                for b in 0..=n - a {
                    let l = [
                        a as f64 / n as f64,
                        b as f64 / n as f64,
                        (n - a - b) as f64 / n as f64,
                    ];
                    best = best.min(quad(q, &l));
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

fn min_norm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_gap = 0.0_f64;
    let mut worst_cert = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..200 {
        let dim = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let a: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let gram: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        (0..dim).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.2 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let xis: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        // Q_ij = ξ_iᵀ G⁻¹ ξ_j
        let reps: Vec<Vec<f64>> = xis.iter().map(|x| dense_solve(&gram, x)).collect();
        let q: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| xis[i].iter().zip(&reps[j]).map(|(p, r)| p * r).sum())
                    .collect()
            })
            .collect();

        let space = InnerProductSpace::from_dense(&gram).unwrap();
        let duals: Vec<Dual> = xis.iter().cloned().map(Dual::new).collect();
        let res = min_norm_point(&space, &duals, None).unwrap();
        let ours = space.dual_inner(&res.xi_tilde, &res.xi_tilde).unwrap();
        let grid = grid_min(&q, 1000);
        let gap = (ours - grid).abs();
        worst_gap = worst_gap.max(gap);

        let val = quad(&q, &res.lambda);
        let tol = default_tol(&q);
        let simplex_ok =
            res.lambda.iter().all(|&l| l >= 0.0) && (res.lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        let cert = (0..m)
            .map(|i| val - tol - (0..m).map(|j| q[i][j] * res.lambda[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        worst_cert = worst_cert.max(cert);
        if gap > 1e-5 || cert > 0.0 || !simplex_ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("200 sets, max |ours - grid| = {worst_gap:.2e}, max certificate violation = {worst_cert:.2e}, failures = {failures}"),
    )
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Primal {
    Primal::new((0..dim).map(|_| rng.gen_range(-5.0..=5.0)).collect())
}

fn direction_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (eps, delta, c) = (1e-4, 1e-4, 0.1);
    let params = DirectionParams::new(eps, delta, c);
    let mut failures = Vec::new();
    let mut counts = [0usize; 2];
    for prob in AnalyticProblem::suite() {
        for k in 0..100 {
            let mut x = random_point(&mut rng, prob.dim());
            // a quarter of the points sit on a kink of the nonsmooth members
            if k % 4 == 0 {
                let mut v = x.coeffs().to_vec();
                v[0] = 0.0;
                x = Primal::new(v);
            }
            // and a tenth lie on the Pareto set itself
            if k % 10 == 5 {
                let s: f64 = rng.gen_range(0.0..1.0);
                x = Primal::new(match prob.name() {
                    "absdist" => vec![2.0 * s, 0.0],
                    "smoothpair" => vec![2.0 * s - 1.0, 0.0],
                    _ => vec![0.0; prob.dim()],
                });
            }
            let d = match compute_descent_direction(&prob, &x, &params) {
                Ok(d) => d,
                Err(e) => {
                    failures.push(format!("{} error {e}", prob.name()));
                    continue;
                }
            };
            let monotone = d.norm_history.windows(2).all(|w| w[1] <= w[0] + 1e-10);
            let ok = match d.status {
                DirectionStatus::CriticalWithinDelta => {
                    counts[0] += 1;
                    d.norm <= delta
                }
                DirectionStatus::AcceptableDescent => {
                    counts[1] += 1;
                    let trial = prob.values(&x.add_scaled(eps / d.norm, &d.v)).unwrap();
                    trial
                        .iter()
                        .zip(&d.fx)
                        .all(|(ft, f0)| *ft <= f0 - c * eps * d.norm)
                }
                DirectionStatus::SamplingFailed => false,
            };
            if !(ok && monotone) {
                failures.push(format!("{} at {:?}", prob.name(), x.coeffs()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "500 points, {} critical / {} descent, failures = {}{}",
            counts[0],
            counts[1],
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn finite_termination(traces: &mut Traces) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let base = SolverConfig::default();
    let mut failures = Vec::new();
    let mut max_iters = 0;
    let mut runs = 0;
    for prob in AnalyticProblem::suite() {
        for s in 0..20 {
            let x1 = random_point(&mut rng, prob.dim());
            let f1 = prob.values(&x1).unwrap();
            let bound = (0..prob.num_objectives())
                .map(|i| {
                    ((f1[i] - prob.infimum(i)) / (base.c * base.eps_bar * base.delta_bar)).ceil() as usize + 1
                })
                .min()
                .unwrap();
            let cfg = SolverConfig {
                max_outer_iters: bound.max(1),
                ..base.clone()
            };
            let rec = solve(&x1, &cfg, &prob).unwrap();
            runs += 1;
            max_iters = max_iters.max(rec.iterations());
            if rec.status != RunStatus::EpsDeltaCritical || rec.iterations() > bound {
                failures.push(format!(
                    "{} start {s}: {} after {}",
                    prob.name(),
                    rec.status,
                    rec.iterations()
                ));
            }
            traces.push(format!("{}#{s}", prob.name()), prob.num_objectives(), rec);
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{runs} runs, max iterations {max_iters}, failures = {}{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn pareto_proxy(traces: &mut Traces) -> Outcome {
    let prob = AnalyticProblem::absdist();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let mut bad = 0;
    for s in 0..20 {
        let x1 = random_point(&mut rng, 2);
        let rec = solve(&x1, &SolverConfig::default(), &prob).unwrap();
        let d = prob.pareto_distance(&rec.x).unwrap();
        worst = worst.max(d);
        if d > 1e-2 || rec.status != RunStatus::EpsDeltaCritical {
            bad += 1;
        }
        traces.push(format!("absdist-pareto#{s}"), 2, rec);
    }
    outcome(
        bad == 0,
        format!("20 starts, max distance to [0,2]x{{0}} = {worst:.2e}, misses = {bad}"),
    )
}

/// Every moving step must lower all objectives by at least `c·t·‖v‖²`.
fn common_descent(traces: &Traces, c: f64) -> Outcome {
    let mut steps = 0;
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (label, k, rec) in &traces.runs {
        let mut values: Vec<&[f64]> = rec.rows.iter().map(|r| r.values.as_slice()).collect();
        values.push(&rec.final_values);
        for (j, row) in rec.rows.iter().enumerate() {
            let (Some(t), Some(kind)) = (row.step, row.step_kind) else {
                continue;
            };
            if kind == StepKind::Null {
                continue;
            }
            steps += 1;
            let next = values[j + 1];
            for (i, (f0, f1)) in row.values.iter().zip(next).take(*k).enumerate() {
                let required = c * t * row.v_norm * row.v_norm;
                let drop = f0 - f1;
                min_margin = min_margin.min(drop - required);
                if !(drop > 0.0 && drop >= required) {
                    failures.push(format!("{label} iter {} objective {i}", row.iter));
                }
            }
        }
    }
    outcome(
        failures.is_empty() && steps > 0,
        format!("{} runs, {steps} accepted steps, min (decrease - c t |v|^2) = {min_margin:.2e}, violations = {}{}",
            traces.runs.len(), failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()),
    )
}

fn fem_correctness() -> Outcome {
    let mesh = build_mesh(0.4).unwrap();
    let ops = assemble_operators(&mesh).unwrap();
    let n = mesh.num_nodes();
    let total_mass: f64 = (0..n).map(|i| ops.mass.row(i).map(|(_, v)| v).sum::<f64>()).sum();
    let row_sum = (0..n)
        .map(|i| ops.stiffness_full.row(i).map(|(_, v)| v).sum::<f64>().abs())
        .fold(0.0, f64::max);

    // no obstacle: compare against a dense solve of the interior system
    let free = ObstacleControlProblem::new(mesh.clone(), Primal::constant(n, 1e6), DEFAULT_WEIGHT).unwrap();
    let u = Primal::new((0..n).map(|i| 1.0 + (i % 5) as f64).collect());
    let state = free.solve_obstacle(&u).unwrap();
    let mu = ops.mass.mul_vec(u.coeffs()).unwrap();
    let b: Vec<f64> = ops.interior.iter().map(|&g| mu[g]).collect();
    let direct = dense_solve(&ops.stiffness.to_dense(), &b);
    let lin_err = ops
        .interior
        .iter()
        .zip(&direct)
        .map(|(&g, d)| (state.y.coeffs()[g] - d).abs())
        .fold(0.0, f64::max);

    // ψ ≡ 0, u ≡ 1
    let zero = ObstacleControlProblem::new(mesh.clone(), Primal::zeros(n), DEFAULT_WEIGHT).unwrap();
    let st = zero.solve_obstacle(&Primal::constant(n, 1.0)).unwrap();
    let y_max = st.y.max_abs();
    let ky = ops.stiffness_full.mul_vec(st.y.coeffs()).unwrap();
    let mu1 = ops.mass.mul_vec(&vec![1.0; n]).unwrap();
    let mut comp = 0.0_f64;
    for &g in &ops.interior {
        let r = ky[g] - mu1[g];
        let gap = 0.0 - st.y.coeffs()[g];
        comp = comp.max(r.max(0.0)).max((-gap).max(0.0)).max((r * gap).abs());
    }

    let pass = (total_mass - 4.0).abs() <= 1e-10
        && row_sum <= 1e-10
        && lin_err <= 1e-10
        && y_max == 0.0
        && comp <= 1e-8;
    outcome(
        pass,
        format!(
            "mass {total_mass:.12}, max |row sum| {row_sum:.1e}, linear solve err {lin_err:.1e}, psi=0: max|y| {y_max:.1e}, complementarity {comp:.1e}"
        ),
    )
}

fn adjoint_check() -> Outcome {
    let p = ObstacleControlProblem::from_h_max(0.4, ObstacleKind::Constant(1.0), DEFAULT_WEIGHT).unwrap();
    let n = p.dim();
    let u = Primal::constant(n, 0.5);
    let state = p.solve_obstacle(&u).unwrap();
    let xi1 = p.subgrad_j1(&u, &state).unwrap();
    let xi2 = p.subgrad_j2(&u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = 1e-5;
    let (mut e1, mut e2) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let d = Primal::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let plus = p.eval_objectives(&u.add_scaled(h, &d)).unwrap();
        let minus = p.eval_objectives(&u.add_scaled(-h, &d)).unwrap();
        for (obj, xi, err) in [(0, &xi1, &mut e1), (1, &xi2, &mut e2)] {
            let fd = (plus[obj] - minus[obj]) / (2.0 * h);
            let an = p.space().dual_pair(xi, &d).unwrap();
            *err = err.max((fd - an).abs() / an.abs().max(1e-300));
        }
    }
    let contact = state.num_active();
    outcome(
        contact == 0 && e1 <= 1e-5 && e2 <= 1e-8,
        format!("active nodes {contact}, max rel err J1 {e1:.2e}, J2 {e2:.2e}"),
    )
}

fn protocol_experiment(dir: &std::path::Path) -> Experiment {
    let args = RunArgs {
        problem: Some("obstacle:constant".into()),
        h_max: Some(vec![0.4]),
        u0: Some((1..=8).map(f64::from).collect()),
        out: Some(dir.to_path_buf()),
        ..RunArgs::default()
    };
    run_experiment(&args.into_config().unwrap()).unwrap()
}

fn protocol(exp: &Experiment, traces: &mut Traces) -> Outcome {
    let runs: Vec<_> = exp.runs.iter().collect();
    let all_critical = runs
        .iter()
        .all(|r| r.summary.status == "EpsDeltaCritical" && r.summary.iters <= 10_000);
    let iters: Vec<usize> = runs.iter().map(|r| r.summary.iters).collect();
    let more_iters = iters[7] > iters[0];

    let last = runs[7];
    let field = last.field.as_ref().unwrap();
    let u_inf = field.u.max_abs();
    let active_u = (0..field.u.dim())
        .filter(|&i| field.active[i])
        .map(|i| field.u.coeffs()[i].abs())
        .fold(0.0, f64::max);
    let n_active = field.active.iter().filter(|&&a| a).count();
    let vanishes = active_u <= 1e-2 * u_inf;

    let mut front: Vec<(f64, f64)> = runs
        .iter()
        .map(|r| (r.summary.values[0], r.summary.values[1]))
        .collect();
    front.sort_by(|a, b| a.0.total_cmp(&b.0));
    let worst_rise = front
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let nondominated = worst_rise <= 1e-6;
    let xi8 = last.summary.max_xi_set;

    for r in &runs {
        traces.push(
            format!("obstacle {}", r.summary.start_label),
            2,
            r.record.clone().unwrap(),
        );
    }
    let checks = [
        ("all EpsDeltaCritical within 10000", all_critical),
        ("iters(u0=8) > iters(u0=1)", more_iters),
        ("|u| on active set <= 1e-2 |u|_inf", vanishes),
        ("front non-dominated", nondominated),
        ("max_xi_set(u0=8) > 2", xi8 > 2),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "iters {iters:?}; u0=8: {n_active} active nodes, max |u| there {active_u:.3e} vs 1e-2*|u|_inf = {:.3e}; max J2 rise along front {worst_rise:.1e}; max_xi_set {xi8}{}",
            1e-2 * u_inf,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    )
}

fn subdifferential_growth(exp: &Experiment) -> Outcome {
    let rec = exp.runs[7].record.as_ref().unwrap();
    let n = rec.rows.len();
    let k = (n / 10).max(1);
    let early = rec.rows[..k].iter().map(|r| r.xi_set_size).max().unwrap();
    let late = rec.rows[n - k..].iter().map(|r| r.xi_set_size).max().unwrap();
    outcome(
        late >= early,
        format!("{n} iterations, max xi_set_size first 10% = {early}, last 10% = {late}"),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome, Duration, Option<Duration>)> = Vec::new();
    let mut traces = Traces::default();
    let mut timed = |name: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        results.push((name, o, elapsed, limit));
    };

    timed(
        "min-norm oracle",
        Some(Duration::from_secs(10)),
        &mut min_norm_oracle,
    );
    timed(
        "direction contract",
        Some(Duration::from_secs(30)),
        &mut direction_contract,
    );
    timed("finite termination", Some(Duration::from_secs(60)), &mut || {
        finite_termination(&mut traces)
    });
    timed(
        "pareto criticality proxy",
        Some(Duration::from_secs(60)),
        &mut || pareto_proxy(&mut traces),
    );
    timed(
        "FEM correctness",
        Some(Duration::from_secs(10)),
        &mut fem_correctness,
    );
    timed("adjoint check", Some(Duration::from_secs(10)), &mut adjoint_check);

    let dir = tempfile::tempdir().expect("temporary directory");
    let mut exp = None;
    timed(
        "obstacle protocol (h_max = 0.4, u0 = 1..8)",
        Some(Duration::from_secs(900)),
        &mut || {
            let e = protocol_experiment(dir.path());
            let o = protocol(&e, &mut traces);
            exp = Some(e);
            o
        },
    );
    let exp = exp.expect("protocol experiment ran");
    timed("subdifferential-size trend", None, &mut || {
        subdifferential_growth(&exp)
    });
    let c = SolverConfig::default().c;
    timed("common descent", None, &mut || common_descent(&traces, c));

    let mut all = true;
    println!();
    for (name, o, elapsed, limit) in &results {
        let in_time = limit.is_none_or(|l| *elapsed <= l);
        let pass = o.pass && in_time;
        all &= pass;
        let budget = limit.map(|l| format!(" / {}s", l.as_secs())).unwrap_or_default();
        println!(
            "[{}] {name}: {} ({:.2}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!();
    if !all {
        eprintln!("acceptance: at least one criterion failed");
        std::process::exit(1);
    }
}
