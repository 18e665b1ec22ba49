use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Graphs, MethodVariant};
use crate::error::{Error, Result};
use crate::par;
use crate::solver::{admm_solve, rmse, SolverConfig, SparseObservations};
use crate::synthgen::rng_for;

/// One `(γ_n, γ_r, γ_c)` setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub gamma_n: f64,
    pub gamma_r: f64,
    pub gamma_c: f64,
}

impl GridCell {
    pub fn new(gamma_n: f64, gamma_r: f64, gamma_c: f64) -> Self {
        GridCell {
            gamma_n,
            gamma_r,
            gamma_c,
        }
    }

    /// Lexicographic order on `(γ_n, γ_r, γ_c)`.
    pub fn lex_cmp(&self, other: &GridCell) -> Ordering {
        self.gamma_n
            .total_cmp(&other.gamma_n)
            .then(self.gamma_r.total_cmp(&other.gamma_r))
            .then(self.gamma_c.total_cmp(&other.gamma_c))
    }

    pub fn apply(&self, base: &SolverConfig) -> SolverConfig {
        base.clone().with_gammas(self.gamma_n, self.gamma_r, self.gamma_c)
    }
}

/// Candidate values per weight; cells are their cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub gamma_n: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma_c: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        let decades = vec![1e-3, 1e-2, 1e-1, 1.0, 10.0];
        Grid {
            gamma_n: decades.clone(),
            gamma_r: decades.clone(),
            gamma_c: decades,
        }
    }
}

impl Grid {
    pub fn single(cell: GridCell) -> Self {
        Grid {
            gamma_n: vec![cell.gamma_n],
            gamma_r: vec![cell.gamma_r],
            gamma_c: vec![cell.gamma_c],
        }
    }

    /// Distinct cells admissible for `variant`, in lexicographic order.
    pub fn cells(&self, variant: MethodVariant) -> Vec<GridCell> {
        let mut cells: Vec<GridCell> = self
            .gamma_n
            .iter()
            .flat_map(|&n| {
                self.gamma_r
                    .iter()
                    .flat_map(move |&r| self.gamma_c.iter().map(move |&c| GridCell::new(n, r, c)))
            })
            .map(|c| variant.constrain(c))
            .collect();
        cells.sort_by(GridCell::lex_cmp);
        cells.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub grid: Grid,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Clip predictions to this range before scoring.
    pub clip: Option<(f64, f64)>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            grid: Grid::default(),
            seed: 0,
            solver: SolverConfig::default(),
            clip: None,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::param("folds", format!("need at least 2, got {}", self.folds)));
        }
        if self.grid.gamma_n.is_empty() || self.grid.gamma_r.is_empty() || self.grid.gamma_c.is_empty() {
            return Err(Error::param("grid", "every weight needs at least one candidate"));
        }
        self.solver.validate()
    }
}

/// Mean held-out RMSE of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellScore {
    pub cell: GridCell,
    pub mean_rmse: f64,
    pub fold_rmse: Vec<f64>,
    pub fold_iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: GridCell,
    pub best_rmse: f64,
    /// One row per admissible cell, in lexicographic cell order.
    pub table: Vec<CellScore>,
}

/// Seeded partition of `0..n` into `folds` parts of near-equal size.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, 20));
    let mut parts = vec![Vec::new(); folds];
    for (k, idx) in order.into_iter().enumerate() {
        parts[k % folds].push(idx);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    parts
}

/// k-fold cross-validation over the cells of `cv.grid` admissible for
/// `variant`. Only `train` is ever read. Ties in mean RMSE go to the
/// lexicographically smallest cell.
pub fn cross_validate(
    train: &SparseObservations,
    graphs: Graphs<'_>,
    cv: &CvConfig,
    variant: MethodVariant,
) -> Result<CvResult> {
    cv.validate()?;
    if train.len() < cv.folds {
        return Err(Error::Empty(format!(
            "{} training entries cannot fill {} folds",
            train.len(),
            cv.folds
        )));
    }
    let folds = fold_partition(train.len(), cv.folds, cv.seed);
    let fits: Vec<(SparseObservations, SparseObservations)> = (0..cv.folds)
        .map(|f| {
            let fit: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, p)| p.iter().copied())
                .collect();
            (train.select(&fit), train.select(&folds[f]))
        })
        .collect();

    let lr = graphs.row.map(|g| g.laplacian());
    let lc = graphs.col.map(|g| g.laplacian());
    let cells = cv.grid.cells(variant);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cv.folds).map(move |f| (c, f)))
        .collect();
    let results = par::map_slice(&jobs, |&(c, f)| -> Result<(f64, usize)> {
        let (fit, held) = &fits[f];
        let cfg = cells[c].apply(&cv.solver);
        let rep = admm_solve(fit, lr.as_ref(), lc.as_ref(), &cfg, None)?;
        Ok((rmse(&rep.recovered, held, cv.clip)?, rep.iterations_used))
    });

    let mut table: Vec<CellScore> = cells
        .iter()
        .map(|&cell| CellScore {
            cell,
            mean_rmse: 0.0,
            fold_rmse: Vec::with_capacity(cv.folds),
            fold_iterations: Vec::with_capacity(cv.folds),
        })
        .collect();
    for (&(c, _), r) in jobs.iter().zip(results) {
        let (score, iters) = r?;
        table[c].fold_rmse.push(score);
        table[c].fold_iterations.push(iters);
    }
    for row in &mut table {
        row.mean_rmse = row.fold_rmse.iter().sum::<f64>() / row.fold_rmse.len() as f64;
    }
    let best = table
        .iter()
        .fold(None::<&CellScore>, |acc, row| match acc {
            Some(b) if !(row.mean_rmse < b.mean_rmse) => Some(b),
            _ => Some(row),
        })
        .expect("grid has at least one cell");
    Ok(CvResult {
        best: best.cell,
        best_rmse: best.mean_rmse,
        table,
    })
}
