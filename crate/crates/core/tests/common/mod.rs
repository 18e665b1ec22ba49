#![allow(dead_code)]

use graphcomplete::graphs::WeightedGraph;
use graphcomplete::solver::SparseObservations;
use graphcomplete::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-2.0..2.0))
}

/// Each pair joined with probability `p`, weight uniform in (0.1, 2).
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

/// Dense `D - W` assembled straight from the edge list.
pub fn dense_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.n_vertices();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

pub fn random_observations(rng: &mut impl Rng, m: usize, n: usize, p: f64) -> SparseObservations {
    let mut entries = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.random_bool(p) {
                entries.push((i, j, rng.random_range(1.0..5.0)));
            }
        }
    }
    SparseObservations::new(m, n, entries).unwrap()
}

/// Rank-`r` product of Gaussian-ish factors.
pub fn low_rank(rng: &mut impl Rng, m: usize, n: usize, r: usize) -> DMatrix<f64> {
    let u = DMatrix::from_fn(m, r, |_, _| rng.random_range(-1.0..1.0));
    let v = DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
    u * v.transpose()
}

pub fn relative(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Column-stacked system matrix of
/// `A_Ω∘Y + γ_r·L_r·Y + γ_c·Y·L_c + ρ·Y`, assembled from
/// `vec(A·Y·B) = (Bᵀ ⊗ A)·vec(Y)`.
pub fn dense_system(
    obs: &SparseObservations,
    lr: &DMatrix<f64>,
    lc: &DMatrix<f64>,
    gamma_r: f64,
    gamma_c: f64,
    rho: f64,
) -> DMatrix<f64> {
    let (m, n) = obs.shape();
    let (im, in_) = (DMatrix::<f64>::identity(m, m), DMatrix::<f64>::identity(n, n));
    let mut a = in_.kronecker(lr) * gamma_r + lc.transpose().kronecker(&im) * gamma_c;
    for k in 0..m * n {
        a[(k, k)] += rho;
    }
    for &(i, j, _) in obs.entries() {
        a[(i + j * m, i + j * m)] += 1.0;
    }
    a
}

/// Unstacks a column-stacked vector into `m × n`.
pub fn unvec(v: &DMatrix<f64>, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(m, n, v.as_slice())
}

/// `η‖X‖_* + ½‖X − H‖²_F` with singular values from nalgebra's own SVD.
pub fn prox_objective(x: &DMatrix<f64>, h: &DMatrix<f64>, eta: f64) -> f64 {
    eta * x.singular_values().sum() + 0.5 * (x - h).norm_squared()
}
