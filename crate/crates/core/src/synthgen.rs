//! Synthetic "Netflix"-style data: a block-constant rating matrix over row
//! and column communities, community graphs polluted with Erdős–Rényi
//! cross-community edges, impulsive integer rating noise, and uniform or
//! power-law observation samplers.
//!
//! Every generator is a pure function of its spec; the same seed always
//! yields the same output.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{build_knn_graph, KnnWeights, WeightedGraph};
use crate::solver::SparseObservations;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Block structure of the ideal rating matrix. Communities occupy
/// contiguous index ranges in the declared order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySpec {
    pub row_community_sizes: Vec<usize>,
    pub col_community_sizes: Vec<usize>,
    /// `block_ratings[r][c]` is the rating every row of community `r` gives
    /// every column of community `c`.
    pub block_ratings: Vec<Vec<u8>>,
    pub seed: u64,
}

impl CommunitySpec {
    /// Seeded community sizes (each at least `min_size`) and a uniform
    /// `{1..5}` block table redrawn until it has rank
    /// `min(row_communities, col_communities)`.
    pub fn random(
        n_rows: usize,
        n_cols: usize,
        row_communities: usize,
        col_communities: usize,
        min_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng_for(seed, 0);
        let row_community_sizes = partition_sizes(n_rows, row_communities, min_size, &mut rng)?;
        let col_community_sizes = partition_sizes(n_cols, col_communities, min_size, &mut rng)?;
        let block_ratings = full_rank_block_table(row_communities, col_communities, &mut rng);
        Ok(CommunitySpec {
            row_community_sizes,
            col_community_sizes,
            block_ratings,
            seed,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.row_community_sizes.iter().sum(),
            self.col_community_sizes.iter().sum(),
        )
    }

    fn validate(&self) -> Result<()> {
        if self.row_community_sizes.is_empty() || self.col_community_sizes.is_empty() {
            return Err(Error::param("communities", "need at least one row and one column community"));
        }
        if self.row_community_sizes.iter().chain(&self.col_community_sizes).any(|&s| s == 0) {
            return Err(Error::param("communities", "community sizes must be positive"));
        }
        if self.block_ratings.len() != self.row_community_sizes.len()
            || self.block_ratings.iter().any(|r| r.len() != self.col_community_sizes.len())
        {
            return Err(Error::dims(
                "block rating table",
                format!("{}x{}", self.row_community_sizes.len(), self.col_community_sizes.len()),
                format!(
                    "{} rows with lengths {:?}",
                    self.block_ratings.len(),
                    self.block_ratings.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            ));
        }
        if self.block_ratings.iter().flatten().any(|&r| !(1..=5).contains(&r)) {
            return Err(Error::param("block_ratings", "ratings must lie in 1..=5"));
        }
        Ok(())
    }
}

/// Splits `total` into `parts` sizes of at least `min_size` each; the
/// surplus is spread by sorted uniform cut points.
pub fn partition_sizes(total: usize, parts: usize, min_size: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if parts == 0 || parts * min_size > total {
        return Err(Error::param(
            "communities",
            format!("cannot split {total} into {parts} parts of at least {min_size}"),
        ));
    }
    let surplus = total - parts * min_size;
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.random_range(0..=surplus)).collect();
    cuts.sort_unstable();
    cuts.push(surplus);
    let mut prev = 0;
    Ok(cuts
        .into_iter()
        .map(|c| {
            let s = min_size + c - prev;
            prev = c;
            s
        })
        .collect())
}

fn full_rank_block_table(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<u8>> {
    let target = rows.min(cols);
    loop {
        let table: Vec<Vec<u8>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(1..=5u8)).collect())
            .collect();
        let dense = DMatrix::from_fn(rows, cols, |i, j| table[i][j] as f64);
        if matrix_rank(&dense) == target {
            return table;
        }
    }
}

/// Numerical rank with the usual `max(m, n) · σ_max · ε` cutoff.
pub fn matrix_rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let smax = sv.max();
    let tol = a.nrows().max(a.ncols()) as f64 * smax * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Community index of every position, for contiguous blocks of the given sizes.
pub fn community_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect()
}

/// The noiseless block-constant rating matrix.
pub fn generate_matrix(spec: &CommunitySpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let rows = community_labels(&spec.row_community_sizes);
    let cols = community_labels(&spec.col_community_sizes);
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        spec.block_ratings[rows[i]][cols[j]] as f64
    }))
}

/// Intra-community k-NN plus cross-community Erdős–Rényi edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNoiseSpec {
    pub k_intra: usize,
    pub error_probability: f64,
    pub seed: u64,
}

fn check_graph_noise(sizes: &[usize], k_intra: usize) -> Result<()> {
    if k_intra == 0 {
        return Err(Error::param("k_intra", "must be at least 1"));
    }
    if let Some((c, &s)) = sizes.iter().enumerate().find(|(_, &s)| s <= k_intra) {
        return Err(Error::param(
            "community_sizes",
            format!("community {c} has {s} members, needs more than k_intra = {k_intra}"),
        ));
    }
    Ok(())
}

/// Union of per-community k-NN graphs. Members of each community get i.i.d.
/// uniform 2-D latent coordinates and are linked to their `k_intra` nearest
/// fellow members; all weights are 1.
pub fn intra_community_graph(sizes: &[usize], k_intra: usize, embedding_seed: u64) -> Result<WeightedGraph> {
    check_graph_noise(sizes, k_intra)?;
    let n: usize = sizes.iter().sum();
    let mut rng = rng_for(embedding_seed, 1);
    let mut edges = Vec::new();
    let mut start = 0;
    for &s in sizes {
        let pts: Vec<(f64, f64)> = (0..s).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let dist = DMatrix::from_fn(s, s, |a, b| {
            let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
            (dx * dx + dy * dy).sqrt()
        });
        let g = build_knn_graph(&dist, k_intra, KnnWeights::Binary)?;
        edges.extend(g.edges().map(|(u, v, w)| (u + start, v + start, w)));
        start += s;
    }
    WeightedGraph::from_edges(n, edges)
}

/// Number of vertex pairs that straddle two communities.
pub fn cross_community_pairs(sizes: &[usize]) -> usize {
    let n: usize = sizes.iter().sum();
    let same: usize = sizes.iter().map(|s| s * (s - 1) / 2).sum();
    n * (n - 1) / 2 - same
}

/// Erdős–Rényi probability whose expected edge count makes erroneous
/// edges a `target_fraction` share of all edges, given `intra_edges` correct
/// ones: `p·C / (p·C + E) = f`.
pub fn error_probability_for_fraction(intra_edges: usize, cross_pairs: usize, target_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&target_fraction) {
        return Err(Error::param(
            "error_fraction",
            format!("must lie in [0, 1), got {target_fraction}"),
        ));
    }
    if cross_pairs == 0 {
        return Ok(0.0);
    }
    let p = target_fraction * intra_edges as f64 / (cross_pairs as f64 * (1.0 - target_fraction));
    if p > 1.0 {
        return Err(Error::param(
            "error_fraction",
            format!("{target_fraction} unreachable: needs ER probability {p} > 1"),
        ));
    }
    Ok(p)
}

/// Community graph with erroneous cross-community edges drawn independently
/// with `noise.error_probability`.
pub fn generate_community_graph(sizes: &[usize], noise: &GraphNoiseSpec, embedding_seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&noise.error_probability) {
        return Err(Error::param(
            "error_probability",
            format!("must lie in [0, 1], got {}", noise.error_probability),
        ));
    }
    let intra = intra_community_graph(sizes, noise.k_intra, embedding_seed)?;
    let labels = community_labels(sizes);
    let n = labels.len();
    let mut rng = rng_for(noise.seed, 2);
    let mut cross = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if labels[u] != labels[v] && rng.random_bool(noise.error_probability) {
                cross.push((u, v, 1.0));
            }
        }
    }
    let cross = WeightedGraph::from_edges(n, cross)?;
    intra.union(&cross)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplingMode {
    /// Exactly `⌈fraction · mn⌉` distinct cells, uniformly.
    Uniform { fraction: f64 },
    /// Cell `(i, j)` (1-based) kept with probability `1 - (1 - 1/(ij))^epochs`.
    PowerLaw { epochs: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub mode: SamplingMode,
    pub seed: u64,
}

/// Inclusion probability of 0-based cell `(i, j)` under power-law sampling.
pub fn power_law_probability(i: usize, j: usize, epochs: u32) -> f64 {
    let q = 1.0 / ((i + 1) as f64 * (j + 1) as f64);
    1.0 - (1.0 - q).powi(epochs as i32)
}

/// Expected observed fraction of an `m × n` matrix under power-law sampling.
pub fn power_law_expected_density(m: usize, n: usize, epochs: u32) -> f64 {
    let total: f64 = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| power_law_probability(i, j, epochs))
        .sum();
    total / (m * n) as f64
}

/// Smallest epoch count whose expected density reaches `target`.
pub fn epochs_for_density(m: usize, n: usize, target: f64) -> Result<u32> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param("density", format!("must lie in (0, 1), got {target}")));
    }
    let (mut lo, mut hi) = (1u32, 1u32);
    while power_law_expected_density(m, n, hi) < target {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::param("density", "unreachable"))?;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if power_law_expected_density(m, n, mid) < target {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Cells picked by the sampler for an `m × n` matrix, sorted.
pub fn sample_cells(m: usize, n: usize, spec: &SamplingSpec) -> Result<Vec<(usize, usize)>> {
    let mut rng = rng_for(spec.seed, 3);
    let mut cells = match spec.mode {
        SamplingMode::Uniform { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::param("fraction", format!("must lie in (0, 1], got {fraction}")));
            }
            let total = m * n;
            let count = ((fraction * total as f64).ceil() as usize).min(total);
            sample(&mut rng, total, count)
                .into_iter()
                .map(|k| (k / n, k % n))
                .collect::<Vec<_>>()
        }
        SamplingMode::PowerLaw { epochs } => {
            if epochs == 0 {
                return Err(Error::param("epochs", "must be at least 1"));
            }
            let mut out = Vec::new();
            for i in 0..m {
                for j in 0..n {
                    if rng.random_bool(power_law_probability(i, j, epochs)) {
                        out.push((i, j));
                    }
                }
            }
            out
        }
    };
    cells.sort_unstable();
    Ok(cells)
}

pub fn sample_observations(m: &DMatrix<f64>, spec: &SamplingSpec) -> Result<SparseObservations> {
    let cells = sample_cells(m.nrows(), m.ncols(), spec)?;
    SparseObservations::from_cells(m, cells)
}

/// Integer-valued impulsive noise, clipped to the rating range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Scale `b` of the underlying Laplace(0, b) draw.
    pub scale: f64,
    pub clip_lo: f64,
    pub clip_hi: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            scale: 0.7,
            clip_lo: 1.0,
            clip_hi: 5.0,
            seed: 0,
        }
    }
}

/// One Laplace(0, `scale`) draw rounded to the nearest integer.
pub fn discretized_laplace(rng: &mut impl Rng, scale: f64) -> f64 {
    let magnitude = Exp::new(1.0 / scale).expect("positive scale").sample(rng);
    let signed = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    signed.round()
}

pub fn add_laplacian_noise(m: &DMatrix<f64>, spec: &NoiseSpec) -> Result<DMatrix<f64>> {
    if !(spec.clip_lo < spec.clip_hi) {
        return Err(Error::param(
            "clip",
            format!("need lo < hi, got [{}, {}]", spec.clip_lo, spec.clip_hi),
        ));
    }
    if !(spec.scale > 0.0) || !spec.scale.is_finite() {
        return Err(Error::param("scale", format!("must be positive, got {}", spec.scale)));
    }
    let mut rng = rng_for(spec.seed, 4);
    // column-major traversal fixes the draw order
    Ok(m.map(|v| (v + discretized_laplace(&mut rng, spec.scale)).clamp(spec.clip_lo, spec.clip_hi)))
}

/// Complete recipe for one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticRecipe {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_communities: usize,
    pub col_communities: usize,
    pub min_community_size: usize,
    pub k_intra: usize,
    /// Target share of erroneous (cross-community) edges among all edges.
    pub error_fraction: f64,
    /// Impulsive noise on the observable matrix; `None` for noiseless data.
    pub noise: Option<NoiseSpec>,
    pub seed: u64,
}

impl Default for SyntheticRecipe {
    fn default() -> Self {
        SyntheticRecipe {
            n_rows: 150,
            n_cols: 200,
            row_communities: 10,
            col_communities: 12,
            min_community_size: 8,
            k_intra: 3,
            error_fraction: 0.1,
            noise: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub communities: CommunitySpec,
    /// Noiseless ideal ratings.
    pub truth: DMatrix<f64>,
    /// Ratings the observations are drawn from (equal to `truth` when noiseless).
    pub observable: DMatrix<f64>,
    pub row_graph: WeightedGraph,
    pub col_graph: WeightedGraph,
    pub row_error_probability: f64,
    pub col_error_probability: f64,
}

impl SyntheticRecipe {
    pub fn generate(&self) -> Result<SyntheticDataset> {
        let communities = CommunitySpec::random(
            self.n_rows,
            self.n_cols,
            self.row_communities,
            self.col_communities,
            self.min_community_size,
            self.seed,
        )?;
        let truth = generate_matrix(&communities)?;
        let observable = match &self.noise {
            Some(noise) => add_laplacian_noise(&truth, noise)?,
            None => truth.clone(),
        };
        let (row_graph, row_error_probability) =
            self.graph_for(&communities.row_community_sizes, self.seed.wrapping_mul(2).wrapping_add(11))?;
        let (col_graph, col_error_probability) =
            self.graph_for(&communities.col_community_sizes, self.seed.wrapping_mul(2).wrapping_add(12))?;
        Ok(SyntheticDataset {
            communities,
            truth,
            observable,
            row_graph,
            col_graph,
            row_error_probability,
            col_error_probability,
        })
    }

    fn graph_for(&self, sizes: &[usize], seed: u64) -> Result<(WeightedGraph, f64)> {
        let intra = intra_community_graph(sizes, self.k_intra, seed)?;
        let p = error_probability_for_fraction(intra.n_edges(), cross_community_pairs(sizes), self.error_fraction)?;
        let noise = GraphNoiseSpec {
            k_intra: self.k_intra,
            error_probability: p,
            seed,
        };
        Ok((generate_community_graph(sizes, &noise, seed)?, p))
    }
}
