mod common;

use common::*;
use graphcomplete::graphs::{Side, WeightedGraph};
use graphcomplete::solver::{
    admm_solve, conjugate_gradient, objective, rmse, smooth_gradient, smooth_objective, svt_prox,
    y_subproblem, SolverConfig, SparseObservations, SubproblemOperator,
};
use graphcomplete::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn connected_graph(r: &mut impl Rng, n: usize) -> WeightedGraph {
    let weights: Vec<f64> = (0..n - 1).map(|_| r.random_range(0.2..1.5)).collect();
    let path = WeightedGraph::from_edges(n, (0..n - 1).map(|v| (v, v + 1, weights[v]))).unwrap();
    let extra = random_graph(r, n, 0.25);
    let extra = WeightedGraph::from_edges(n, extra.edges().filter(|&(u, v, _)| v != u + 1)).unwrap();
    path.union(&extra).unwrap()
}

#[test]
fn objective_matches_dense_brute_force() {
    let mut r = rng(4);
    for _ in 0..10 {
        let x = random_matrix(&mut r, 4, 3);
        let obs = random_observations(&mut r, 4, 3, 0.6);
        let (gr, gc) = (random_graph(&mut r, 4, 0.6), random_graph(&mut r, 3, 0.6));
        let cfg = SolverConfig::default().with_gammas(0.7, 0.3, 1.9);
        let got = objective(&x, &obs, Some(&gr.laplacian()), Some(&gc.laplacian()), &cfg).unwrap();

        let mut data = 0.0;
        for i in 0..4 {
            for j in 0..3 {
                if let Some(v) = obs.get(i, j) {
                    data += (x[(i, j)] - v).powi(2);
                }
            }
        }
        let row = (x.transpose() * dense_laplacian(&gr) * &x).trace();
        let col = (&x * dense_laplacian(&gc) * x.transpose()).trace();
        let nuc: f64 = x.singular_values().iter().sum();
        let want = 0.7 * nuc + 0.5 * data + 0.5 * 0.3 * row + 0.5 * 1.9 * col;
        assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn prox_beats_random_candidates_and_perturbations() {
    let mut r = rng(11);
    for _ in 0..5 {
        let h = random_matrix(&mut r, 3, 3);
        for eta in [0.1, 1.0, 5.0] {
            let x = svt_prox(&h, eta).unwrap();
            let best = prox_objective(&x, &h, eta);
            for _ in 0..500 {
                let c = &h + random_matrix(&mut r, 3, 3) * r.random_range(0.0..1.5);
                assert!(best <= prox_objective(&c, &h, eta) + 1e-6);
            }
            for k in 0..9 {
                for s in [-1e-3, 1e-3] {
                    let mut c = x.clone();
                    c[k] += s;
                    assert!(best <= prox_objective(&c, &h, eta) + 1e-6);
                }
            }
        }
    }
}

#[test]
fn subproblem_matches_kronecker_solve() {
    let mut r = rng(5);
    for _ in 0..6 {
        let obs = random_observations(&mut r, 8, 6, 0.4);
        let (gr, gc) = (random_graph(&mut r, 8, 0.3), random_graph(&mut r, 6, 0.3));
        let h = random_matrix(&mut r, 8, 6);
        let cfg = SolverConfig { rho: 0.7, cg_tol: 1e-14, cg_max_iter: 1000, ..SolverConfig::default() }
            .with_gammas(1.0, 0.4, 1.3);
        let (y, rep) = y_subproblem(&obs, Some(&gr.laplacian()), Some(&gc.laplacian()), &h, &cfg, &DMatrix::zeros(8, 6)).unwrap();
        let a = dense_system(&obs, &dense_laplacian(&gr), &dense_laplacian(&gc), 0.4, 1.3, 0.7);
        let rhs = obs.to_dense() + &h * 0.7;
        let b = DMatrix::from_column_slice(48, 1, rhs.as_slice());
        let want = unvec(&a.lu().solve(&b).unwrap(), 8, 6);
        assert!(relative(&y, &want) < 1e-8, "{} after {} CG steps", relative(&y, &want), rep.iterations);
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(6);
    for _ in 0..10 {
        let obs = random_observations(&mut r, 5, 4, 0.5);
        let (gr, gc) = (random_graph(&mut r, 5, 0.5), random_graph(&mut r, 4, 0.5));
        let (lr, lc) = (gr.laplacian(), gc.laplacian());
        let cfg = SolverConfig::default().with_gammas(0.0, 0.8, 0.3);
        let y = random_matrix(&mut r, 5, 4);
        let g = smooth_gradient(&y, &obs, Some(&lr), Some(&lc), &cfg).unwrap();
        let fd = DMatrix::from_fn(5, 4, |i, j| {
            let (mut p, mut m) = (y.clone(), y.clone());
            p[(i, j)] += 1e-5;
            m[(i, j)] -= 1e-5;
            (smooth_objective(&p, &obs, Some(&lr), Some(&lc), &cfg).unwrap()
                - smooth_objective(&m, &obs, Some(&lr), Some(&lc), &cfg).unwrap())
                / 2e-5
        });
        assert!(relative(&fd, &g) < 1e-5);
    }
}

#[test]
fn operator_is_symmetric_and_cg_residual_monotone() {
    let mut r = rng(7);
    for _ in 0..20 {
        let (m, n) = (r.random_range(2..12), r.random_range(2..12));
        let obs = random_observations(&mut r, m, n, 0.3);
        let (gr, gc) = (random_graph(&mut r, m, 0.4), random_graph(&mut r, n, 0.4));
        let (lr, lc) = (gr.laplacian(), gc.laplacian());
        let op = SubproblemOperator::new(&obs, Some(&lr), Some(&lc), 2.0, 0.5, 0.1).unwrap();
        let (p, q) = (random_matrix(&mut r, m, n), random_matrix(&mut r, m, n));
        let (apq, paq) = (op.apply(&p).dot(&q), p.dot(&op.apply(&q)));
        assert!((apq - paq).abs() <= 1e-10 * apq.abs().max(1.0));

        let mut y = DMatrix::zeros(m, n);
        let rep = conjugate_gradient(&op, &p, &mut y, 1e-12, 500);
        assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]), "{:?}", rep.residual_history);
        let true_rel = (&p - op.apply(&y)).norm() / p.norm();
        assert!((true_rel - rep.relative_residual).abs() <= 1e-9);
    }
}

#[test]
fn graph_only_solve_matches_closed_form() {
    let mut r = rng(8);
    for _ in 0..3 {
        let obs = random_observations(&mut r, 10, 8, 0.5);
        let (gr, gc) = (connected_graph(&mut r, 10), connected_graph(&mut r, 8));
        let cfg = SolverConfig {
            rho: 1.0,
            max_iter: 20_000,
            tol_abs: 1e-12,
            tol_rel: 1e-11,
            cg_tol: 1e-13,
            cg_max_iter: 500,
            ..SolverConfig::default()
        }
        .with_gammas(0.0, 0.6, 0.9);
        let rep = admm_solve(&obs, Some(&gr.laplacian()), Some(&gc.laplacian()), &cfg, None).unwrap();
        assert!(rep.converged);
        let a = dense_system(&obs, &dense_laplacian(&gr), &dense_laplacian(&gc), 0.6, 0.9, 0.0);
        let b = DMatrix::from_column_slice(80, 1, obs.to_dense().as_slice());
        let want = unvec(&a.lu().solve(&b).unwrap(), 10, 8);
        assert!(relative(&rep.recovered, &want) < 1e-6, "{}", relative(&rep.recovered, &want));
    }
}

#[test]
fn rank_one_recovery() {
    let mut r = rng(10);
    let truth = low_rank(&mut r, 20, 20, 1);
    let cells: Vec<(usize, usize)> = (0..20)
        .flat_map(|i| (0..20).map(move |j| (i, j)))
        .filter(|_| r.random_bool(0.6))
        .collect();
    let obs = SparseObservations::from_cells(&truth, cells).unwrap();
    let cfg = SolverConfig { rho: 0.1, max_iter: 5000, tol_abs: 1e-9, tol_rel: 1e-8, ..SolverConfig::default() }
        .with_gammas(1e-3, 0.0, 0.0);
    let rep = admm_solve(&obs, None, None, &cfg, None).unwrap();
    let (mut err, mut norm) = (0.0, 0.0);
    for i in 0..20 {
        for j in 0..20 {
            if !obs.contains(i, j) {
                err += (rep.recovered[(i, j)] - truth[(i, j)]).powi(2);
                norm += truth[(i, j)].powi(2);
            }
        }
    }
    assert!((err / norm).sqrt() < 1e-2, "relative error {}", (err / norm).sqrt());
}

#[test]
fn zero_graph_weights_reproduce_nuclear_only_bit_for_bit() {
    let mut r = rng(12);
    let truth = low_rank(&mut r, 15, 12, 2);
    let obs = SparseObservations::from_cells(&truth, (0..15).flat_map(|i| (0..12).map(move |j| (i, j))).filter(|&(i, j)| (i * 7 + j * 3) % 5 < 3)).unwrap();
    let (gr, gc) = (random_graph(&mut r, 15, 0.3), random_graph(&mut r, 12, 0.3));
    let cfg = SolverConfig::default().with_gammas(0.5, 0.0, 0.0);
    let with = admm_solve(&obs, Some(&gr.laplacian()), Some(&gc.laplacian()), &cfg, None).unwrap();
    let without = admm_solve(&obs, None, None, &cfg, None).unwrap();
    assert_eq!(with.recovered, without.recovered);
    assert_eq!(with.iterations_used, without.iterations_used);
}

#[test]
fn converged_state_is_a_fixed_point_of_the_x_update() {
    let mut r = rng(13);
    let truth = low_rank(&mut r, 12, 10, 2);
    let obs = SparseObservations::from_cells(&truth, (0..12).flat_map(|i| (0..10).map(move |j| (i, j))).filter(|&(i, j)| (i + 2 * j) % 3 != 0)).unwrap();
    let (gr, gc) = (random_graph(&mut r, 12, 0.3), random_graph(&mut r, 10, 0.3));
    let cfg = SolverConfig::default().with_gammas(0.2, 0.05, 0.05);
    let rep = admm_solve(&obs, Some(&gr.laplacian()), Some(&gc.laplacian()), &cfg, None).unwrap();
    assert!(rep.converged);
    let s = &rep.state;
    let again = svt_prox(&(&s.y - &s.z / cfg.rho), cfg.gamma_n / cfg.rho).unwrap();
    let tol = rep.trace.last().unwrap().primal_tolerance;
    assert!((again - &s.x).norm() < 10.0 * tol);
    assert_eq!(rep.trace.len(), rep.iterations_used);
    assert!(rep.trace.iter().all(|t| t.objective.is_finite()));
}

#[test]
fn rejects_mismatched_graphs() {
    let obs = SparseObservations::empty(4, 3);
    let g = WeightedGraph::empty(3);
    let err = admm_solve(&obs, Some(&g.laplacian()), None, &SolverConfig::default(), None).unwrap_err();
    assert!(err.to_string().contains("4"), "{err}");
    assert!(g.laplacian().apply(&DMatrix::zeros(4, 3), Side::Left).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rmse_matches_loop(seed in any::<u64>(), m in 1usize..8, n in 1usize..8) {
        let mut r = rng(seed);
        let obs = random_observations(&mut r, m, n, 0.7);
        prop_assume!(!obs.is_empty());
        let x = random_matrix(&mut r, m, n);
        let mut s = 0.0;
        for &(i, j, v) in obs.entries() {
            s += (x[(i, j)] - v) * (x[(i, j)] - v);
        }
        let want = (s / obs.len() as f64).sqrt();
        prop_assert!((rmse(&x, &obs, None).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn prox_rank_counts_singular_values_above_threshold(seed in any::<u64>(), eta in 0.0f64..3.0) {
        let h = random_matrix(&mut rng(seed), 5, 4);
        let out = graphcomplete::solver::svt_prox_detailed(&h, eta).unwrap();
        let above = h.singular_values().iter().filter(|&&s| s > eta).count();
        prop_assert_eq!(out.rank, above);
        prop_assert!((out.nuclear_norm - out.matrix.singular_values().sum()).abs() < 1e-9);
    }
}
