use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use graphcomplete::eval::{
    cross_validate, observation_sweep, write_sweep_csv, CvConfig, Graphs, Grid, MethodVariant, SweepConfig,
};
use graphcomplete::graphbuild::{build_side_graph_with_summary, FeatureBlock, PairwiseDistances};
use graphcomplete::graphs::{build_knn_graph, read_edge_list, write_edge_list, KnnWeights, WeightedGraph};
use graphcomplete::io::{ingest_ratings, read_dense_csv, read_ratings, write_dense_csv, IdMap};
use graphcomplete::solver::{admm_solve, rmse, SolveReport, SolverConfig, SparseObservations};
use graphcomplete::synthgen::{sample_observations, NoiseSpec, SamplingSpec};
use graphcomplete::DMatrix;
use serde::Serialize;

use crate::config::{parse_variant, set, GraphMethod, RunConfig};
use crate::manifest::Manifest;
use crate::{
    BuildGraphArgs, Cli, Command, CvArgs, Entities, GraphInputs, GridFlags, IngestArgs, SolveArgs, SolverFlags,
    SweepArgs, SynthArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    set(&mut cfg.seed, cli.seed);
    match cli.command {
        Command::Synth(a) => synth(cfg, a),
        Command::Ingest(a) => ingest(cfg, a),
        Command::BuildGraph(a) => build_graph(cfg, a),
        Command::Solve(a) => solve(cfg, a),
        Command::Cv(a) => cv(cfg, a),
        Command::Sweep(a) => sweep(cfg, a),
    }
}

/// Collects output files and the manifest of one command.
struct Outputs {
    dir: PathBuf,
    manifest: Manifest,
}

impl Outputs {
    fn new<S: Serialize>(dir: &Path, command: &str, seed: u64, spec: &S) -> Result<Self> {
        let manifest = Manifest::new(command, seed, spec)?;
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs { dir: dir.to_path_buf(), manifest })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> graphcomplete::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.dir)?;
        println!("wrote {} files to {}", self.manifest.outputs.len() + 1, self.dir.display());
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn name_of(path: &Path) -> String {
    path.display().to_string()
}

fn read_observations(path: &Path) -> Result<SparseObservations> {
    Ok(SparseObservations::read_triplets(open(path)?, &name_of(path), None)?)
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    Ok(read_dense_csv(open(path)?, &name_of(path))?)
}

fn read_graph(path: Option<&PathBuf>) -> Result<Option<WeightedGraph>> {
    path.map(|p| Ok(read_edge_list(open(p)?, &name_of(p), None)?)).transpose()
}

fn load_graphs(g: &GraphInputs) -> Result<(Option<WeightedGraph>, Option<WeightedGraph>)> {
    Ok((read_graph(g.row_graph.as_ref())?, read_graph(g.col_graph.as_ref())?))
}

fn apply_solver_flags(s: &mut SolverConfig, f: &SolverFlags) {
    set(&mut s.gamma_n, f.gamma_n);
    set(&mut s.gamma_r, f.gamma_r);
    set(&mut s.gamma_c, f.gamma_c);
    set(&mut s.rho, f.rho);
    set(&mut s.max_iter, f.max_iter);
    set(&mut s.tol_abs, f.tol_abs);
    set(&mut s.tol_rel, f.tol_rel);
    set(&mut s.cg_tol, f.cg_tol);
    set(&mut s.cg_max_iter, f.cg_max_iter);
}

fn clip_pair(flag: Option<&Vec<f64>>, cfg: Option<[f64; 2]>) -> Result<Option<(f64, f64)>> {
    let pair = match flag {
        Some(v) if v.len() == 2 => Some([v[0], v[1]]),
        Some(v) => bail!("--clip takes two values, got {}", v.len()),
        None => cfg,
    };
    match pair {
        Some([lo, hi]) if !(lo < hi) => bail!("clip range [{lo}, {hi}] is empty"),
        Some([lo, hi]) => Ok(Some((lo, hi))),
        None => Ok(None),
    }
}

fn cv_config(cfg: &mut RunConfig, grid: &GridFlags, solver: &SolverFlags) -> Result<CvConfig> {
    apply_solver_flags(&mut cfg.solver, solver);
    set(&mut cfg.cv.folds, grid.folds);
    set(&mut cfg.cv.gamma_n, grid.grid_gamma_n.clone());
    set(&mut cfg.cv.gamma_r, grid.grid_gamma_r.clone());
    set(&mut cfg.cv.gamma_c, grid.grid_gamma_c.clone());
    let clip = clip_pair(grid.clip.as_ref(), cfg.cv.clip)?;
    cfg.cv.clip = clip.map(|(lo, hi)| [lo, hi]);
    Ok(CvConfig {
        folds: cfg.cv.folds,
        grid: Grid { gamma_n: cfg.cv.gamma_n.clone(), gamma_r: cfg.cv.gamma_r.clone(), gamma_c: cfg.cv.gamma_c.clone() },
        seed: cfg.seed,
        solver: cfg.solver.clone(),
        clip,
    })
}

fn synth(mut cfg: RunConfig, a: SynthArgs) -> Result<()> {
    let r = &mut cfg.recipe;
    r.seed = cfg.seed;
    set(&mut r.n_rows, a.rows);
    set(&mut r.n_cols, a.cols);
    set(&mut r.row_communities, a.row_communities);
    set(&mut r.col_communities, a.col_communities);
    set(&mut r.min_community_size, a.min_community_size);
    set(&mut r.k_intra, a.k_intra);
    set(&mut r.error_fraction, a.error_fraction);
    if let Some(scale) = a.noise_scale {
        r.noise = Some(NoiseSpec { scale, ..r.noise.unwrap_or_default() });
    }
    if let Some(noise) = &mut r.noise {
        noise.seed = cfg.seed.wrapping_add(3);
    }
    set(&mut cfg.sampling.mode, a.sampling);
    set(&mut cfg.sampling.fraction, a.fraction);
    if a.epochs.is_some() {
        cfg.sampling.epochs = a.epochs;
    }

    let data = cfg.recipe.generate()?;
    let sampling = SamplingSpec {
        mode: cfg.sampling.mode_for(cfg.recipe.n_rows, cfg.recipe.n_cols)?,
        seed: cfg.seed.wrapping_add(1),
    };
    let obs = sample_observations(&data.observable, &sampling)?;

    #[derive(Serialize)]
    struct Spec<'a> {
        recipe: &'a graphcomplete::synthgen::SyntheticRecipe,
        sampling: &'a crate::config::SamplingSection,
    }
    let mut out = Outputs::new(&a.out, "synth", cfg.seed, &Spec { recipe: &cfg.recipe, sampling: &cfg.sampling })?;
    out.write("truth.csv", |w| write_dense_csv(&data.truth, w))?;
    out.write("observable.csv", |w| write_dense_csv(&data.observable, w))?;
    out.write("observations.txt", |w| obs.write_triplets(w))?;
    out.write("row_graph.edges", |w| write_edge_list(&data.row_graph, w))?;
    out.write("col_graph.edges", |w| write_edge_list(&data.col_graph, w))?;
    let m = &mut out.manifest;
    m.result("observed_entries", obs.len() as i64);
    m.result("density", obs.density());
    m.result("row_graph_edges", data.row_graph.n_edges() as i64);
    m.result("col_graph_edges", data.col_graph.n_edges() as i64);
    m.result("row_error_probability", data.row_error_probability);
    m.result("col_error_probability", data.col_error_probability);
    m.result("row_community_sizes", sizes(&data.communities.row_community_sizes));
    m.result("col_community_sizes", sizes(&data.communities.col_community_sizes));
    out.finish()
}

fn sizes(v: &[usize]) -> toml::Value {
    toml::Value::Array(v.iter().map(|&s| toml::Value::Integer(s as i64)).collect())
}

fn ingest(mut cfg: RunConfig, a: IngestArgs) -> Result<()> {
    let s = &mut cfg.ingest;
    set(&mut s.delimiter, a.delimiter);
    set(&mut s.rating_min, a.rating_min);
    set(&mut s.rating_max, a.rating_max);
    set(&mut s.select.target_rows, a.rows);
    set(&mut s.select.target_cols, a.cols);
    set(&mut s.select.row_percentile, a.row_percentile);
    set(&mut s.select.col_percentile, a.col_percentile);

    // parse and select before touching the output directory
    let records = read_ratings(open(&a.ratings)?, &name_of(&a.ratings), &s.delimiter, (s.rating_min, s.rating_max))?;
    let res = ingest_ratings(&records, &s.select)?;

    let mut out = Outputs::new(&a.out, "ingest", cfg.seed, &cfg.ingest)?;
    out.write("target.txt", |w| res.target.write_triplets(w))?;
    out.write("user_features.txt", |w| res.user_features.write_triplets(w))?;
    out.write("movie_features.txt", |w| res.movie_features.write_triplets(w))?;
    let maps: [(&str, &IdMap); 4] = [
        ("users.ids", &res.users),
        ("movies.ids", &res.movies),
        ("other_users.ids", &res.other_users),
        ("other_movies.ids", &res.other_movies),
    ];
    for (name, map) in maps {
        out.write(name, |w| map.write(w))?;
    }
    let m = &mut out.manifest;
    m.result("ratings_read", records.len() as i64);
    m.result("target_entries", res.target.len() as i64);
    m.result("density", res.density());
    m.result("user_feature_entries", res.user_features.len() as i64);
    m.result("movie_feature_entries", res.movie_features.len() as i64);
    println!("target block {}x{}, density {:.4}", res.target.n_rows(), res.target.n_cols(), res.density());
    out.finish()
}

fn build_graph(mut cfg: RunConfig, a: BuildGraphArgs) -> Result<()> {
    let g = &mut cfg.graph;
    set(&mut g.method, a.method);
    set(&mut g.build.epsilon, a.epsilon);
    if a.alpha.is_some() {
        g.build.alpha = a.alpha;
    }
    set(&mut g.build.min_common, a.min_common);
    g.build.exclude_zero_dmin |= a.exclude_zero_dmin;
    set(&mut g.k, a.k);

    let obs = read_observations(&a.features)?;
    let block = match a.entities {
        Entities::Rows => FeatureBlock::rows_as_entities(&obs),
        Entities::Cols => FeatureBlock::cols_as_entities(&obs),
    };

    #[derive(Serialize)]
    struct Spec<'a> {
        entities: &'static str,
        graph: &'a crate::config::GraphSection,
    }
    let entities = match a.entities {
        Entities::Rows => "rows",
        Entities::Cols => "cols",
    };
    match cfg.graph.method {
        GraphMethod::Epsilon => {
            let (graph, summary) = build_side_graph_with_summary(&block, &cfg.graph.build)?;
            let mut out = Outputs::new(&a.out, "build-graph", cfg.seed, &Spec { entities, graph: &cfg.graph })?;
            out.write("graph.edges", |w| write_edge_list(&graph, w))?;
            out.write("distance_summary.csv", |w| summary.write_csv(w))?;
            out.manifest.result("edges", graph.n_edges() as i64);
            out.manifest.result("defined_pairs", summary.defined_pairs as i64);
            out.manifest.result("alpha", summary.alpha);
            out.finish()
        }
        GraphMethod::Knn => {
            let pd = PairwiseDistances::compute(&block, cfg.graph.build.min_common);
            if pd.defined_values().is_empty() {
                bail!(
                    "no entity pair among {} shares at least {} rated items",
                    block.n_entities(),
                    cfg.graph.build.min_common
                );
            }
            // undefined pairs rank after every defined one and are dropped afterwards
            let far = pd.defined_values().iter().fold(0.0f64, |a, &b| a.max(b)) * 2.0 + 1.0;
            let dist = pd.matrix().map(|d| if d.is_nan() { far } else { d });
            let full = build_knn_graph(&dist, cfg.graph.k, KnnWeights::Binary)?;
            let graph = WeightedGraph::from_edges(
                full.n_vertices(),
                full.edges().filter(|&(u, v, _)| pd.get(u, v).is_some()),
            )?;
            let mut out = Outputs::new(&a.out, "build-graph", cfg.seed, &Spec { entities, graph: &cfg.graph })?;
            out.write("graph.edges", |w| write_edge_list(&graph, w))?;
            out.manifest.result("edges", graph.n_edges() as i64);
            out.manifest.result("defined_pairs", pd.defined_values().len() as i64);
            out.finish()
        }
    }
}

fn write_trace<W: Write>(rep: &SolveReport, mut w: W) -> graphcomplete::Result<()> {
    writeln!(
        w,
        "iteration,objective,primal_residual,dual_residual,primal_tolerance,dual_tolerance,rank_estimate,cg_iterations,cg_relative_residual"
    )?;
    for t in &rep.trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            t.iteration,
            t.objective,
            t.primal_residual,
            t.dual_residual,
            t.primal_tolerance,
            t.dual_tolerance,
            t.rank_estimate,
            t.cg.iterations,
            t.cg.relative_residual
        )?;
    }
    Ok(())
}

fn solve(mut cfg: RunConfig, a: SolveArgs) -> Result<()> {
    apply_solver_flags(&mut cfg.solver, &a.solver);
    let clip = clip_pair(a.clip.as_ref(), cfg.cv.clip)?;
    let obs = read_observations(&a.observations)?;
    let (row, col) = load_graphs(&a.graphs)?;
    let test = match &a.test {
        Some(p) => Some(SparseObservations::read_triplets(open(p)?, &name_of(p), Some(obs.shape()))?),
        None => None,
    };
    let lr = row.as_ref().map(|g| g.laplacian());
    let lc = col.as_ref().map(|g| g.laplacian());
    let rep = admm_solve(&obs, lr.as_ref(), lc.as_ref(), &cfg.solver, None)?;

    #[derive(Serialize)]
    struct Spec<'a> {
        solver: &'a SolverConfig,
        clip: Option<(f64, f64)>,
    }
    let mut out = Outputs::new(&a.out, "solve", cfg.seed, &Spec { solver: &cfg.solver, clip })?;
    out.write("recovered.csv", |w| write_dense_csv(&rep.recovered, w))?;
    out.write("trace.csv", |w| write_trace(&rep, w))?;
    let train = rmse(&rep.recovered, &obs, clip)?;
    let m = &mut out.manifest;
    m.result("iterations", rep.iterations_used as i64);
    m.result("converged", rep.converged);
    m.result("cg_cap_hits", rep.cg_cap_hits() as i64);
    m.result("train_rmse", train);
    if let Some(t) = &test {
        let r = rmse(&rep.recovered, t, clip)?;
        m.result("test_rmse", r);
        println!("test RMSE {r:.6}");
    }
    if !rep.converged {
        eprintln!("warning: stopped at the iteration cap ({}) before converging", cfg.solver.max_iter);
    }
    out.finish()
}

fn cv(mut cfg: RunConfig, a: CvArgs) -> Result<()> {
    if let Some(v) = &a.variant {
        cfg.cv.variant = parse_variant(v)?;
    }
    let cvc = cv_config(&mut cfg, &a.grid, &a.solver)?;
    let obs = read_observations(&a.observations)?;
    let (row, col) = load_graphs(&a.graphs)?;
    let graphs = Graphs { row: row.as_ref(), col: col.as_ref() };
    let res = cross_validate(&obs, graphs, &cvc, cfg.cv.variant)?;

    #[derive(Serialize)]
    struct Spec<'a> {
        variant: MethodVariant,
        cv: &'a CvConfig,
    }
    let mut out = Outputs::new(&a.out, "cv", cfg.seed, &Spec { variant: cfg.cv.variant, cv: &cvc })?;
    out.write("cv_table.csv", |w| {
        write!(w, "gamma_n,gamma_r,gamma_c,mean_rmse")?;
        for f in 0..cvc.folds {
            write!(w, ",fold_{f}")?;
        }
        writeln!(w)?;
        for row in &res.table {
            write!(w, "{},{},{},{}", row.cell.gamma_n, row.cell.gamma_r, row.cell.gamma_c, row.mean_rmse)?;
            for r in &row.fold_rmse {
                write!(w, ",{r}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    let m = &mut out.manifest;
    m.result("best_gamma_n", res.best.gamma_n);
    m.result("best_gamma_r", res.best.gamma_r);
    m.result("best_gamma_c", res.best.gamma_c);
    m.result("best_rmse", res.best_rmse);
    println!(
        "best cell gamma_n={} gamma_r={} gamma_c={} (RMSE {:.6})",
        res.best.gamma_n, res.best.gamma_r, res.best.gamma_c, res.best_rmse
    );
    out.finish()
}

fn sweep(mut cfg: RunConfig, a: SweepArgs) -> Result<()> {
    let cvc = cv_config(&mut cfg, &a.grid, &a.solver)?;
    let s = &mut cfg.sweep;
    set(&mut s.levels, a.levels);
    set(&mut s.sampling, a.sampling.map(Into::into));
    if let Some(vs) = &a.variants {
        s.variants = vs.iter().map(|v| parse_variant(v)).collect::<Result<_>>()?;
    }
    set(&mut s.test_fraction, a.test_fraction);
    let sc = SweepConfig {
        levels: s.levels.clone(),
        sampling: s.sampling,
        variants: s.variants.clone(),
        test_fraction: s.test_fraction,
        seed: cfg.seed,
        cv: cvc,
    };

    let truth = read_matrix(&a.truth)?;
    let observable = match &a.observable {
        Some(p) => read_matrix(p)?,
        None => truth.clone(),
    };
    let (row, col) = load_graphs(&a.graphs)?;
    let start = Instant::now();
    let rows = observation_sweep(&truth, &observable, Graphs { row: row.as_ref(), col: col.as_ref() }, &sc)?;

    let mut out = Outputs::new(&a.out, "sweep", cfg.seed, &sc)?;
    out.write("sweep.csv", |w| write_sweep_csv(&rows, w))?;
    for r in &rows {
        out.manifest.result(&format!("rmse_{}_{}", r.variant.name(), r.level), r.rmse_test);
    }
    println!("{} sweep points in {:.1} s", rows.len(), start.elapsed().as_secs_f64());
    out.finish()
}
