use nalgebra::DMatrix;

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Edge weighting for k-nearest-neighbor graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnnWeights {
    /// Every edge gets weight 1.
    Binary,
    /// Gaussian kernel `exp(-d² / alpha)`.
    Kernel { alpha: f64 },
}

/// Kernel bandwidth that makes `exp(-(d - d_min)² / alpha)` fall to 0.01 at
/// `d = epsilon`.
pub fn default_alpha(epsilon: f64, d_min: f64) -> f64 {
    (epsilon - d_min).powi(2) / 100f64.ln()
}

fn check_distance_matrix(dist: &DMatrix<f64>, allow_undefined: bool) -> Result<()> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(Error::dims(
            "distance matrix",
            "square matrix",
            format!("{}x{}", n, dist.ncols()),
        ));
    }
    for i in 0..n {
        for j in 0..n {
            let d = dist[(i, j)];
            if d.is_nan() {
                if allow_undefined && i != j && dist[(j, i)].is_nan() {
                    continue;
                }
                return Err(Error::param("distances", format!("undefined entry at ({i}, {j})")));
            }
            if d < 0.0 || d.is_infinite() {
                return Err(Error::param("distances", format!("invalid distance {d} at ({i}, {j})")));
            }
            if d != dist[(j, i)] {
                return Err(Error::param("distances", format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Connects every vertex to its `k` nearest other vertices and symmetrizes by
/// union. Ties go to the lower vertex index.
pub fn build_knn_graph(dist: &DMatrix<f64>, k: usize, weights: KnnWeights) -> Result<WeightedGraph> {
    check_distance_matrix(dist, false)?;
    let n = dist.nrows();
    if k == 0 || k >= n {
        return Err(Error::param(
            "k",
            format!("need 1 <= k < n_vertices, got k = {k} with {n} vertices"),
        ));
    }
    if let KnnWeights::Kernel { alpha } = weights {
        if !(alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
    }
    let mut pairs = Vec::with_capacity(n * k);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
        for &j in &order[..k] {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = match weights {
                KnnWeights::Binary => 1.0,
                KnnWeights::Kernel { alpha } => (-dist[(u, v)].powi(2) / alpha).exp(),
            };
            (u, v, w)
        })
        .filter(|&(_, _, w)| w > 0.0)
        .collect();
    Ok(WeightedGraph::from_sorted_unique(n, &edges))
}

/// ε-neighborhood graph with Gaussian weights anchored at `d_min`:
/// `w = exp(-(d - d_min)² / alpha)` when `d < epsilon`, no edge otherwise.
///
/// NaN entries mark undefined distances and never produce an edge.
pub fn build_epsilon_graph(
    dist: &DMatrix<f64>,
    epsilon: f64,
    alpha: f64,
    d_min: f64,
) -> Result<WeightedGraph> {
    check_distance_matrix(dist, true)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if !(d_min >= 0.0) || !(epsilon > d_min) {
        return Err(Error::param(
            "epsilon",
            format!("need epsilon > d_min >= 0, got epsilon = {epsilon}, d_min = {d_min}"),
        ));
    }
    let n = dist.nrows();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let d = dist[(u, v)];
            if d < epsilon {
                let w = (-(d - d_min).powi(2) / alpha).exp();
                if w > 0.0 {
                    edges.push((u, v, w));
                }
            }
        }
    }
    Ok(WeightedGraph::from_sorted_unique(n, &edges))
}
