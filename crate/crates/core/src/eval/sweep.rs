use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cross_validate, make_split, CvConfig, Graphs, MethodVariant};
use crate::error::{Error, Result};
use crate::solver::{admm_solve, rmse, SparseObservations};
use crate::synthgen::{power_law_probability, rng_for};

/// How training cells are drawn from the non-test pool at each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSampling {
    /// Exactly `⌈level · mn⌉` pool cells, uniformly.
    Uniform,
    /// Power-law inclusion restricted to the pool, with the epoch count
    /// chosen so the expected number of training cells reaches `level · mn`.
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Training-set sizes as fractions of all `mn` cells.
    pub levels: Vec<f64>,
    pub sampling: SweepSampling,
    pub variants: Vec<MethodVariant>,
    /// Fixed share of cells held out for testing.
    pub test_fraction: f64,
    pub seed: u64,
    pub cv: CvConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            levels: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50],
            sampling: SweepSampling::Uniform,
            variants: vec![
                MethodVariant::NuclearOnly,
                MethodVariant::GraphsOnly,
                MethodVariant::Combined,
            ],
            test_fraction: 0.35,
            seed: 0,
            cv: CvConfig::default(),
        }
    }
}

/// One `(level, variant)` point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub level: f64,
    pub variant: MethodVariant,
    pub gamma_n: f64,
    pub gamma_r: f64,
    pub gamma_c: f64,
    pub rmse_test: f64,
    /// ADMM iterations of the refit on the full training set.
    pub iters: usize,
    /// Wall time of cross-validation plus refit.
    pub seconds: f64,
    /// Realized training density (differs from `level` under power-law sampling).
    pub observed_fraction: f64,
}

pub const SWEEP_CSV_HEADER: &str = "level,variant,gamma_n,gamma_r,gamma_c,rmse_test,iters,seconds";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.level,
            r.variant.name(),
            r.gamma_n,
            r.gamma_r,
            r.gamma_c,
            r.rmse_test,
            r.iters,
            r.seconds
        )?;
    }
    Ok(())
}

fn pool_epochs(pool: &[(usize, usize)], target: f64) -> Result<u32> {
    let expected = |s: u32| pool.iter().map(|&(i, j)| power_law_probability(i, j, s)).sum::<f64>();
    if expected(u32::MAX / 2) < target {
        return Err(Error::param("level", format!("{target} cells exceed the training pool")));
    }
    let (mut lo, mut hi) = (1u32, 1u32);
    while expected(hi) < target {
        lo = hi;
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if expected(mid) < target {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Draws the training cells for one level from `pool` (the non-test cells
/// of an `m × n` matrix).
pub fn sample_training_cells(
    pool: &[(usize, usize)],
    shape: (usize, usize),
    level: f64,
    sampling: SweepSampling,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {level}")));
    }
    let target = level * (shape.0 * shape.1) as f64;
    let mut rng = rng_for(seed, 30);
    let mut cells: Vec<(usize, usize)> = match sampling {
        SweepSampling::Uniform => {
            let count = target.ceil() as usize;
            if count > pool.len() {
                return Err(Error::param(
                    "level",
                    format!("{count} training cells requested but only {} are outside the test set", pool.len()),
                ));
            }
            sample(&mut rng, pool.len(), count).into_iter().map(|k| pool[k]).collect()
        }
        SweepSampling::PowerLaw => {
            let s = pool_epochs(pool, target)?;
            pool.iter()
                .copied()
                .filter(|&(i, j)| rng.random_bool(power_law_probability(i, j, s)))
                .collect()
        }
    };
    cells.sort_unstable();
    Ok(cells)
}

/// Recovery error versus number of observations. A fixed
/// `test_fraction` of all cells is held out; at every level training cells
/// are sampled from the rest with values read from `observable`, each
/// variant is cross-validated and refit on the full training set, and the
/// refit is scored against `truth` on the held-out cells.
pub fn observation_sweep(
    truth: &DMatrix<f64>,
    observable: &DMatrix<f64>,
    graphs: Graphs<'_>,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if truth.shape() != observable.shape() {
        return Err(Error::dims(
            "sweep observable matrix",
            format!("{}x{}", truth.nrows(), truth.ncols()),
            format!("{}x{}", observable.nrows(), observable.ncols()),
        ));
    }
    if cfg.variants.is_empty() || cfg.levels.is_empty() {
        return Err(Error::param("sweep", "need at least one level and one variant"));
    }
    cfg.cv.validate()?;
    let shape = truth.shape();
    let split = make_split(&SparseObservations::fully_observed(truth), cfg.test_fraction, cfg.seed)?;
    let pool: Vec<(usize, usize)> = split.train.entries().iter().map(|&(i, j, _)| (i, j)).collect();
    let lr = graphs.row.map(|g| g.laplacian());
    let lc = graphs.col.map(|g| g.laplacian());

    let mut rows = Vec::with_capacity(cfg.levels.len() * cfg.variants.len());
    for (li, &level) in cfg.levels.iter().enumerate() {
        let cells = sample_training_cells(&pool, shape, level, cfg.sampling, cfg.seed.wrapping_add(1 + li as u64))?;
        let train = SparseObservations::from_cells(observable, cells)?;
        for &variant in &cfg.variants {
            let started = Instant::now();
            let cv = CvConfig {
                seed: cfg.cv.seed.wrapping_add(li as u64),
                ..cfg.cv.clone()
            };
            let best = cross_validate(&train, graphs, &cv, variant)?.best;
            let rep = admm_solve(&train, lr.as_ref(), lc.as_ref(), &best.apply(&cfg.cv.solver), None)?;
            let score = rmse(&rep.recovered, &split.test, cfg.cv.clip)?;
            rows.push(SweepRow {
                level,
                variant,
                gamma_n: best.gamma_n,
                gamma_r: best.gamma_r,
                gamma_c: best.gamma_c,
                rmse_test: score,
                iters: rep.iterations_used,
                seconds: started.elapsed().as_secs_f64(),
                observed_fraction: train.density(),
            });
        }
    }
    Ok(rows)
}
