//! Row and column graphs built from side-information rating blocks that have
//! missing values. Entities are compared by the RMS difference of the
//! ratings they share, and linked in an ε-neighborhood graph with Gaussian
//! weights.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{build_epsilon_graph, default_alpha, WeightedGraph};
use crate::par;
use crate::solver::SparseObservations;

/// Sparse ratings of entities (users or movies) over feature items.
#[derive(Debug, Clone)]
pub struct FeatureBlock {
    profiles: Vec<Vec<(usize, f64)>>,
}

impl FeatureBlock {
    /// Rows of `obs` are the entities, columns the feature items.
    pub fn rows_as_entities(obs: &SparseObservations) -> Self {
        let mut profiles = vec![Vec::new(); obs.n_rows()];
        for &(i, j, v) in obs.entries() {
            profiles[i].push((j, v));
        }
        FeatureBlock { profiles }
    }

    /// Columns of `obs` are the entities, rows the feature items.
    pub fn cols_as_entities(obs: &SparseObservations) -> Self {
        let mut profiles = vec![Vec::new(); obs.n_cols()];
        for &(i, j, v) in obs.entries() {
            profiles[j].push((i, v));
        }
        for p in &mut profiles {
            p.sort_by_key(|&(k, _)| k);
        }
        FeatureBlock { profiles }
    }

    pub fn n_entities(&self) -> usize {
        self.profiles.len()
    }

    /// Sorted `(item, rating)` pairs of one entity.
    pub fn profile(&self, entity: usize) -> &[(usize, f64)] {
        &self.profiles[entity]
    }
}

/// RMS difference over the items both entities rated, with the size of that
/// common support. Returns `None` when fewer than `min_common` items are shared.
pub fn common_support_distance(f: &FeatureBlock, i: usize, j: usize, min_common: usize) -> Option<(f64, usize)> {
    let (a, b) = (f.profile(i), f.profile(j));
    let (mut p, mut q) = (0, 0);
    let mut sse = 0.0;
    let mut count = 0;
    while p < a.len() && q < b.len() {
        match a[p].0.cmp(&b[q].0) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                sse += (a[p].1 - b[q].1).powi(2);
                count += 1;
                p += 1;
                q += 1;
            }
        }
    }
    if count == 0 || count < min_common {
        return None;
    }
    Some(((sse / count as f64).sqrt(), count))
}

/// All-pairs common-support distances. Undefined pairs hold NaN.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    dist: DMatrix<f64>,
    support: DMatrix<u32>,
}

impl PairwiseDistances {
    pub fn compute(f: &FeatureBlock, min_common: usize) -> Self {
        let n = f.n_entities();
        let rows = par::map_range(n, |i| {
            ((i + 1)..n)
                .map(|j| common_support_distance(f, i, j, 0).map(|(d, c)| (d, c)))
                .collect::<Vec<_>>()
        });
        let mut dist = DMatrix::from_element(n, n, f64::NAN);
        let mut support = DMatrix::from_element(n, n, 0u32);
        for i in 0..n {
            dist[(i, i)] = 0.0;
            support[(i, i)] = f.profile(i).len() as u32;
            for (off, r) in rows[i].iter().enumerate() {
                let j = i + 1 + off;
                if let Some((d, c)) = *r {
                    support[(i, j)] = c as u32;
                    support[(j, i)] = c as u32;
                    if c >= min_common.max(1) {
                        dist[(i, j)] = d;
                        dist[(j, i)] = d;
                    }
                }
            }
        }
        PairwiseDistances { dist, support }
    }

    pub fn n_entities(&self) -> usize {
        self.dist.nrows()
    }

    /// Distance matrix with NaN marking undefined pairs.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let d = self.dist[(i, j)];
        (!d.is_nan()).then_some(d)
    }

    pub fn support_count(&self, i: usize, j: usize) -> usize {
        self.support[(i, j)] as usize
    }

    /// Defined off-diagonal distances, one per unordered pair, ascending.
    pub fn defined_values(&self) -> Vec<f64> {
        let n = self.n_entities();
        let mut v: Vec<f64> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Smallest defined distance, optionally ignoring exact zeros.
    pub fn d_min(&self, exclude_zeros: bool) -> Option<f64> {
        self.defined_values()
            .into_iter()
            .find(|&d| !(exclude_zeros && d == 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphBuildConfig {
    pub epsilon: f64,
    /// Kernel bandwidth; derived from `epsilon` and `d_min` when unset.
    pub alpha: Option<f64>,
    pub min_common: usize,
    pub exclude_zero_dmin: bool,
}

impl Default for GraphBuildConfig {
    fn default() -> Self {
        GraphBuildConfig {
            epsilon: 1.1,
            alpha: None,
            min_common: 3,
            exclude_zero_dmin: false,
        }
    }
}

/// Diagnostics of one side-graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSummary {
    pub n_entities: usize,
    pub defined_pairs: usize,
    pub d_min: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// Quantiles at 0, 0.25, 0.5, 0.75, 1 of the defined distances.
    pub quantiles: [f64; 5],
    pub edge_count: usize,
}

impl DistanceSummary {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n_entities,defined_pairs,d_min,alpha,epsilon,q0,q25,q50,q75,q100,edge_count")?;
        let q = &self.quantiles;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n_entities,
            self.defined_pairs,
            self.d_min,
            self.alpha,
            self.epsilon,
            q[0],
            q[1],
            q[2],
            q[3],
            q[4],
            self.edge_count
        )?;
        Ok(())
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// ε-neighborhood graph over the entities of `f`.
pub fn build_side_graph(f: &FeatureBlock, cfg: &GraphBuildConfig) -> Result<WeightedGraph> {
    build_side_graph_with_summary(f, cfg).map(|(g, _)| g)
}

pub fn build_side_graph_with_summary(
    f: &FeatureBlock,
    cfg: &GraphBuildConfig,
) -> Result<(WeightedGraph, DistanceSummary)> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {}", cfg.epsilon)));
    }
    let pd = PairwiseDistances::compute(f, cfg.min_common);
    let values = pd.defined_values();
    if values.is_empty() {
        return Err(Error::Empty(format!(
            "no entity pair among {} shares at least {} rated items",
            f.n_entities(),
            cfg.min_common
        )));
    }
    let d_min = pd
        .d_min(cfg.exclude_zero_dmin)
        .ok_or_else(|| Error::Empty("every defined distance is zero".into()))?;
    if !(cfg.epsilon > d_min) {
        return Err(Error::param(
            "epsilon",
            format!("epsilon = {} does not exceed the minimum distance {d_min}", cfg.epsilon),
        ));
    }
    let alpha = cfg.alpha.unwrap_or_else(|| default_alpha(cfg.epsilon, d_min));
    let graph = build_epsilon_graph(pd.matrix(), cfg.epsilon, alpha, d_min)?;
    let summary = DistanceSummary {
        n_entities: f.n_entities(),
        defined_pairs: values.len(),
        d_min,
        alpha,
        epsilon: cfg.epsilon,
        quantiles: [0.0, 0.25, 0.5, 0.75, 1.0].map(|p| quantile(&values, p)),
        edge_count: graph.n_edges(),
    };
    Ok((graph, summary))
}
