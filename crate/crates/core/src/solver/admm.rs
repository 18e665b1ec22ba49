use nalgebra::DMatrix;
use serde::Serialize;

use super::cg::{conjugate_gradient, subproblem_rhs, CgReport, SubproblemOperator};
use super::prox::svt_prox_detailed;
use super::{axpy, check_graphs, check_shape, smooth_objective, SolverConfig, SparseObservations};
use crate::error::{Error, Result};
use crate::graphs::Laplacian;

/// Iterates of the split problem `min F(X) + G(Y) s.t. X = Y`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// One ADMM iteration as seen from outside.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Full objective evaluated at the X iterate.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Singular values of the X-update input that survived thresholding.
    pub rank_estimate: usize,
    pub primal_tolerance: f64,
    pub dual_tolerance: f64,
    #[serde(skip)]
    pub cg: CgReport,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final Y iterate.
    pub recovered: DMatrix<f64>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub iterations_used: usize,
    pub state: SolverState,
}

impl SolveReport {
    /// Number of iterations whose inner CG solve hit its iteration cap.
    pub fn cg_cap_hits(&self) -> usize {
        self.trace.iter().filter(|t| !t.cg.converged).count()
    }
}

/// Runs ADMM from `init` (or zeros) until both residuals fall below
/// `tol_abs·√(mn) + tol_rel·s`, where `s` is the largest Frobenius norm among
/// the current `X`, `Y` and `Z`, or until `max_iter`.
///
/// Either Laplacian may be omitted; it is then treated as zero. With
/// `gamma_n = 0` the X-update is the identity.
pub fn admm_solve(
    obs: &SparseObservations,
    row_laplacian: Option<&Laplacian<'_>>,
    col_laplacian: Option<&Laplacian<'_>>,
    cfg: &SolverConfig,
    init: Option<&DMatrix<f64>>,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_graphs(obs, row_laplacian, col_laplacian)?;
    if obs.entries().iter().any(|e| !e.2.is_finite()) {
        return Err(Error::NonFinite("observed values"));
    }
    let (m, n) = obs.shape();
    let mut y = match init {
        Some(x0) => {
            check_shape("initial iterate", x0, obs)?;
            x0.clone()
        }
        None => DMatrix::zeros(m, n),
    };
    let mut z = DMatrix::zeros(m, n);
    let mut x = y.clone();

    let op = SubproblemOperator::new(obs, row_laplacian, col_laplacian, cfg.gamma_r, cfg.gamma_c, cfg.rho)?;
    let inv_rho = 1.0 / cfg.rho;
    let eta = cfg.gamma_n / cfg.rho;
    let abs_floor = cfg.tol_abs * ((m * n) as f64).sqrt();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    for k in 1..=cfg.max_iter {
        // X-update: prox of (γ_n/ρ)‖·‖_* at Y - Z/ρ
        let h_x = &y - &z * inv_rho;
        let (rank, nuclear) = if cfg.gamma_n == 0.0 {
            x = h_x;
            (m.min(n), 0.0)
        } else {
            let out = svt_prox_detailed(&h_x, eta).map_err(|e| match e {
                Error::NonFinite(_) => Error::Diverged {
                    iteration: k,
                    detail: "non-finite X-update input".into(),
                },
                other => other,
            })?;
            x = out.matrix;
            (out.rank, out.nuclear_norm)
        };

        // Y-update: CG on the graph-regularized least squares, warm-started
        let h_y = &x + &z * inv_rho;
        let b = subproblem_rhs(obs, &h_y, cfg.rho);
        let y_prev = y.clone();
        let cg = conjugate_gradient(&op, &b, &mut y, cfg.cg_tol, cfg.cg_max_iter);

        // dual ascent
        let diff = &x - &y;
        axpy(&mut z, cfg.rho, &diff);

        primal = diff.norm();
        dual = cfg.rho * (&y - &y_prev).norm();
        if !primal.is_finite() || !dual.is_finite() {
            return Err(Error::Diverged {
                iteration: k,
                detail: format!("residuals primal = {primal}, dual = {dual}"),
            });
        }
        let scale = x.norm().max(y.norm()).max(z.norm());
        let tol = abs_floor + cfg.tol_rel * scale;
        let objective = cfg.gamma_n * nuclear + smooth_objective(&x, obs, row_laplacian, col_laplacian, cfg)?;
        if !objective.is_finite() {
            return Err(Error::Diverged {
                iteration: k,
                detail: "objective is not finite".into(),
            });
        }
        trace.push(TraceRecord {
            iteration: k,
            objective,
            primal_residual: primal,
            dual_residual: dual,
            rank_estimate: rank,
            primal_tolerance: tol,
            dual_tolerance: tol,
            cg,
        });
        if primal <= tol && dual <= tol {
            converged = true;
            break;
        }
    }

    let iterations_used = trace.len();
    Ok(SolveReport {
        recovered: y.clone(),
        trace,
        converged,
        iterations_used,
        state: SolverState {
            x,
            y,
            z,
            iteration: iterations_used,
            primal_residual: primal,
            dual_residual: dual,
        },
    })
}
