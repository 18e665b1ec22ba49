//! Data-parallel kernels. Run once with the default features and once with
//! `--no-default-features`; benchmark ids carry the mode, so criterion keeps
//! both result sets side by side under `target/criterion`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphcomplete::eval::{cross_validate, CvConfig, Graphs, Grid, MethodVariant};
use graphcomplete::graphbuild::{FeatureBlock, PairwiseDistances};
use graphcomplete::solver::{admm_solve, SolverConfig};
use graphcomplete::synthgen::{sample_observations, SamplingMode, SamplingSpec, SyntheticRecipe};

fn mode() -> &'static str {
    if graphcomplete::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn pairwise(c: &mut Criterion) {
    let data = SyntheticRecipe { n_rows: 300, n_cols: 200, ..SyntheticRecipe::default() }.generate().unwrap();
    let spec = SamplingSpec { mode: SamplingMode::Uniform { fraction: 0.3 }, seed: 1 };
    let obs = sample_observations(&data.truth, &spec).unwrap();
    let block = FeatureBlock::rows_as_entities(&obs);
    c.bench_with_input(BenchmarkId::new("pairwise_distances_300", mode()), &block, |b, f| {
        b.iter(|| PairwiseDistances::compute(f, 3))
    });
}

fn cv(c: &mut Criterion) {
    let data = SyntheticRecipe { n_rows: 60, n_cols: 50, row_communities: 4, col_communities: 5, ..Default::default() }
        .generate()
        .unwrap();
    let spec = SamplingSpec { mode: SamplingMode::Uniform { fraction: 0.3 }, seed: 2 };
    let obs = sample_observations(&data.truth, &spec).unwrap();
    let cfg = CvConfig {
        folds: 3,
        grid: Grid { gamma_n: vec![0.1, 1.0], gamma_r: vec![0.01], gamma_c: vec![0.01] },
        solver: SolverConfig { rho: 0.1, ..SolverConfig::default() },
        ..CvConfig::default()
    };
    let graphs = Graphs { row: Some(&data.row_graph), col: Some(&data.col_graph) };
    let mut group = c.benchmark_group("cross_validate_60x50");
    group.sample_size(10);
    group.bench_function(mode(), |b| b.iter(|| cross_validate(&obs, graphs, &cfg, MethodVariant::Combined).unwrap()));
    group.finish();

    // a single solve is sequential in both builds; kept as the reference point
    let solver = SolverConfig { rho: 0.1, gamma_r: 0.01, gamma_c: 0.01, ..SolverConfig::default() };
    let (lr, lc) = (data.row_graph.laplacian(), data.col_graph.laplacian());
    let mut group = c.benchmark_group("admm_solve_60x50");
    group.sample_size(10);
    group.bench_function(mode(), |b| b.iter(|| admm_solve(&obs, Some(&lr), Some(&lc), &solver, None).unwrap()));
    group.finish();
}

criterion_group!(benches, pairwise, cv);
criterion_main!(benches);
