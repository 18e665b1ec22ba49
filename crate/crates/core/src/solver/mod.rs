//! ADMM solver for nuclear-norm matrix completion with row and column graph
//! smoothness penalties:
//!
//! ```text
//! min_X  γ_n‖X‖_* + ½‖A_Ω∘(X - M)‖²_F + (γ_r/2) tr(XᵀL_rX) + (γ_c/2) tr(XL_cXᵀ)
//! ```
//!
//! The nuclear term is handled by singular value thresholding, the smooth
//! part by a conjugate-gradient solve, and the two are coupled through the
//! split `X = Y` with scaled dual `Z`.

mod admm;
mod cg;
mod observations;
mod prox;

pub use admm::{admm_solve, SolveReport, SolverState, TraceRecord};
pub use cg::{conjugate_gradient, y_subproblem, CgReport, SubproblemOperator};
pub use observations::SparseObservations;
pub use prox::{nuclear_norm, soft_threshold, svt_prox, svt_prox_detailed, SvtOutput};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Laplacian, Side};

/// Regularization weights, ADMM penalty and stopping tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub gamma_n: f64,
    pub gamma_r: f64,
    pub gamma_c: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gamma_n: 1.0,
            gamma_r: 0.0,
            gamma_c: 0.0,
            rho: 1.0,
            max_iter: 500,
            tol_abs: 1e-6,
            tol_rel: 1e-4,
            cg_tol: 1e-8,
            cg_max_iter: 200,
        }
    }
}

impl SolverConfig {
    pub fn with_gammas(mut self, gamma_n: f64, gamma_r: f64, gamma_c: f64) -> Self {
        self.gamma_n = gamma_n;
        self.gamma_r = gamma_r;
        self.gamma_c = gamma_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_n", self.gamma_n),
            ("gamma_r", self.gamma_r),
            ("gamma_c", self.gamma_c),
            ("tol_abs", self.tol_abs),
            ("tol_rel", self.tol_rel),
            ("cg_tol", self.cg_tol),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::param("rho", format!("must be positive, got {}", self.rho)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn check_shape(context: &'static str, x: &DMatrix<f64>, obs: &SparseObservations) -> Result<()> {
    if x.shape() != obs.shape() {
        return Err(Error::dims(
            context,
            format!("{}x{}", obs.n_rows(), obs.n_cols()),
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    Ok(())
}

fn check_graphs(obs: &SparseObservations, lr: Option<&Laplacian<'_>>, lc: Option<&Laplacian<'_>>) -> Result<()> {
    if let Some(l) = lr {
        if l.dim() != obs.n_rows() {
            return Err(Error::dims("row graph vs observations", format!("{} vertices", obs.n_rows()), l.dim()));
        }
    }
    if let Some(l) = lc {
        if l.dim() != obs.n_cols() {
            return Err(Error::dims("column graph vs observations", format!("{} vertices", obs.n_cols()), l.dim()));
        }
    }
    Ok(())
}

/// `½‖A_Ω∘(X - M)‖²_F + (γ_r/2)‖X‖²_{D,r} + (γ_c/2)‖X‖²_{D,c}`, the smooth
/// part of the objective.
pub fn smooth_objective(
    x: &DMatrix<f64>,
    obs: &SparseObservations,
    lr: Option<&Laplacian<'_>>,
    lc: Option<&Laplacian<'_>>,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_shape("objective", x, obs)?;
    check_graphs(obs, lr, lc)?;
    let data: f64 = obs.entries().iter().map(|&(i, j, v)| (x[(i, j)] - v).powi(2)).sum();
    let mut total = 0.5 * data;
    if let Some(l) = lr.filter(|_| cfg.gamma_r != 0.0) {
        total += 0.5 * cfg.gamma_r * l.dirichlet_energy(x, Side::Left)?;
    }
    if let Some(l) = lc.filter(|_| cfg.gamma_c != 0.0) {
        total += 0.5 * cfg.gamma_c * l.dirichlet_energy(x, Side::Right)?;
    }
    Ok(total)
}

/// Full objective including `γ_n‖X‖_*`.
pub fn objective(
    x: &DMatrix<f64>,
    obs: &SparseObservations,
    lr: Option<&Laplacian<'_>>,
    lc: Option<&Laplacian<'_>>,
    cfg: &SolverConfig,
) -> Result<f64> {
    let smooth = smooth_objective(x, obs, lr, lc, cfg)?;
    let nuc = if cfg.gamma_n != 0.0 { cfg.gamma_n * nuclear_norm(x) } else { 0.0 };
    Ok(smooth + nuc)
}

/// Gradient of [`smooth_objective`]: `A_Ω∘(Y - M) + γ_r·L_r·Y + γ_c·Y·L_c`.
pub fn smooth_gradient(
    y: &DMatrix<f64>,
    obs: &SparseObservations,
    lr: Option<&Laplacian<'_>>,
    lc: Option<&Laplacian<'_>>,
    cfg: &SolverConfig,
) -> Result<DMatrix<f64>> {
    check_shape("gradient", y, obs)?;
    check_graphs(obs, lr, lc)?;
    let mut g = DMatrix::zeros(y.nrows(), y.ncols());
    for &(i, j, v) in obs.entries() {
        g[(i, j)] = y[(i, j)] - v;
    }
    if let Some(l) = lr.filter(|_| cfg.gamma_r != 0.0) {
        l.apply_into(y, Side::Left, cfg.gamma_r, &mut g);
    }
    if let Some(l) = lc.filter(|_| cfg.gamma_c != 0.0) {
        l.apply_into(y, Side::Right, cfg.gamma_c, &mut g);
    }
    Ok(g)
}

/// Root mean squared error of `x` against the observed entries, optionally
/// clipping predictions to `[lo, hi]` first.
pub fn rmse(x: &DMatrix<f64>, obs: &SparseObservations, clip: Option<(f64, f64)>) -> Result<f64> {
    check_shape("rmse", x, obs)?;
    if obs.is_empty() {
        return Err(Error::Empty("rmse needs at least one observed entry".into()));
    }
    let sse: f64 = obs
        .entries()
        .iter()
        .map(|&(i, j, v)| {
            let p = match clip {
                Some((lo, hi)) => x[(i, j)].clamp(lo, hi),
                None => x[(i, j)],
            };
            (p - v).powi(2)
        })
        .sum();
    Ok((sse / obs.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_basics() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let obs = SparseObservations::fully_observed(&m);
        assert_eq!(rmse(&m, &obs, None).unwrap(), 0.0);
        let one = SparseObservations::new(2, 2, vec![(1, 0, 1.0)]).unwrap();
        assert_eq!(rmse(&m, &one, None).unwrap(), 2.0);
        assert_eq!(rmse(&m, &one, Some((1.0, 2.0))).unwrap(), 1.0);
        assert!(rmse(&m, &SparseObservations::empty(2, 2), None).is_err());
    }

    #[test]
    fn objective_trivial_cases() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let obs = SparseObservations::new(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]).unwrap();
        let cfg = SolverConfig::default().with_gammas(0.0, 0.0, 0.0);
        assert_eq!(objective(&m, &obs, None, None, &cfg).unwrap(), 0.0);
        let zero = DMatrix::zeros(2, 3);
        let cfg = SolverConfig::default().with_gammas(1.0, 0.0, 0.0);
        assert_eq!(objective(&zero, &obs, None, None, &cfg).unwrap(), 0.5 * 14.0);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { rho: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { gamma_n: -1.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { max_iter: 0, ..Default::default() }.validate().is_err());
    }
}

/// `y += a·x` over matching shapes.
pub(crate) fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yv, xv) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yv += a * xv;
    }
}
