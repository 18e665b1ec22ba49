//! Matrix-free conjugate gradient for the graph-regularized least-squares
//! subproblem
//!
//! ```text
//! A_Ω∘Y + γ_r·L_r·Y + γ_c·Y·L_c + ρ·Y = A_Ω∘M + ρ·H
//! ```
//!
//! The operator is symmetric positive definite whenever `ρ > 0`. It is
//! applied directly on `m × n` matrices; the `mn × mn` system is never formed.

use nalgebra::DMatrix;

use super::{axpy, SolverConfig, SparseObservations};
use crate::error::{Error, Result};
use crate::graphs::{Laplacian, Side};

/// Outcome of one inner CG solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final `‖A(Y) - b‖_F / ‖b‖_F`.
    pub relative_residual: f64,
    pub converged: bool,
    /// Relative residual before the first step and after every step.
    pub residual_history: Vec<f64>,
}

/// The linear map `Y ↦ A_Ω∘Y + γ_r·L_r·Y + γ_c·Y·L_c + ρ·Y`.
///
/// A graph term is skipped entirely when its Laplacian is absent or its
/// weight is zero.
pub struct SubproblemOperator<'a> {
    shape: (usize, usize),
    observed: Vec<usize>,
    row_graph: Option<(&'a Laplacian<'a>, f64)>,
    col_graph: Option<(&'a Laplacian<'a>, f64)>,
    rho: f64,
}

impl<'a> SubproblemOperator<'a> {
    pub fn new(
        obs: &SparseObservations,
        row_laplacian: Option<&'a Laplacian<'a>>,
        col_laplacian: Option<&'a Laplacian<'a>>,
        gamma_r: f64,
        gamma_c: f64,
        rho: f64,
    ) -> Result<Self> {
        let (m, n) = obs.shape();
        if let Some(l) = row_laplacian {
            if l.dim() != m {
                return Err(Error::dims("row graph vs observations", format!("{m} vertices"), l.dim()));
            }
        }
        if let Some(l) = col_laplacian {
            if l.dim() != n {
                return Err(Error::dims("column graph vs observations", format!("{n} vertices"), l.dim()));
            }
        }
        if !(rho > 0.0) {
            return Err(Error::param("rho", format!("must be positive, got {rho}")));
        }
        Ok(SubproblemOperator {
            shape: (m, n),
            observed: obs.linear_positions(),
            row_graph: row_laplacian.filter(|_| gamma_r != 0.0).map(|l| (l, gamma_r)),
            col_graph: col_laplacian.filter(|_| gamma_c != 0.0).map(|l| (l, gamma_c)),
            rho,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// `out = A(p)`.
    pub fn apply_into(&self, p: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.copy_from(p);
        *out *= self.rho;
        let ps = p.as_slice();
        let os = out.as_mut_slice();
        for &k in &self.observed {
            os[k] += ps[k];
        }
        if let Some((l, g)) = self.row_graph {
            l.apply_into(p, Side::Left, g, out);
        }
        if let Some((l, g)) = self.col_graph {
            l.apply_into(p, Side::Right, g, out);
        }
    }

    pub fn apply(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.shape.0, self.shape.1);
        self.apply_into(p, &mut out);
        out
    }
}

/// Conjugate gradient on `op(y) = b`, starting from `y`, with minimal
/// residual smoothing of the iterates: after each CG step the returned
/// iterate moves toward the new CG iterate by the step that minimizes the
/// residual norm, so the reported residual never increases.
///
/// Stops once the relative residual reaches `tol` or after `max_iter`
/// steps; in the latter case the best iterate is returned with
/// `converged = false`.
pub fn conjugate_gradient(
    op: &SubproblemOperator<'_>,
    b: &DMatrix<f64>,
    y: &mut DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> CgReport {
    let b_norm = b.norm();
    if b_norm == 0.0 {
        y.fill(0.0);
        return CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            residual_history: vec![0.0],
        };
    }
    let mut ap = DMatrix::zeros(b.nrows(), b.ncols());
    op.apply_into(y, &mut ap);
    let mut r = b - &ap;
    // smoothed residual s tracks b - A·y for the returned iterate y
    let mut s = r.clone();
    let mut x = y.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut ss = rr;
    let mut history = vec![ss.sqrt() / b_norm];
    let mut iterations = 0;
    while history[iterations] > tol && iterations < max_iter {
        op.apply_into(&p, &mut ap);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rr_new = r.norm_squared();
        iterations += 1;

        let d = &r - &s;
        let dd = d.norm_squared();
        if dd > 0.0 {
            let eta = -s.dot(&d) / dd;
            axpy(&mut s, eta, &d);
            let dy = &x - &*y;
            axpy(y, eta, &dy);
            ss = s.norm_squared();
        }
        history.push(ss.sqrt() / b_norm);

        let beta = rr_new / rr;
        rr = rr_new;
        // p = r + beta p
        p *= beta;
        p += &r;
    }
    let relative_residual = history[iterations];
    CgReport {
        iterations,
        relative_residual,
        converged: relative_residual <= tol,
        residual_history: history,
    }
}

/// Solves the Y-subproblem `prox_{G/ρ}(H)` by warm-started CG.
pub fn y_subproblem(
    obs: &SparseObservations,
    row_laplacian: Option<&Laplacian<'_>>,
    col_laplacian: Option<&Laplacian<'_>>,
    h: &DMatrix<f64>,
    cfg: &SolverConfig,
    warm_start: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, CgReport)> {
    let (m, n) = obs.shape();
    for (what, a) in [("H", h), ("warm start", warm_start)] {
        if a.shape() != (m, n) {
            return Err(Error::dims(
                if what == "H" { "y_subproblem H" } else { "y_subproblem warm start" },
                format!("{m}x{n}"),
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
    }
    let op = SubproblemOperator::new(obs, row_laplacian, col_laplacian, cfg.gamma_r, cfg.gamma_c, cfg.rho)?;
    let b = subproblem_rhs(obs, h, cfg.rho);
    let mut y = warm_start.clone();
    let report = conjugate_gradient(&op, &b, &mut y, cfg.cg_tol, cfg.cg_max_iter);
    Ok((y, report))
}

/// `A_Ω∘M + ρ·H`.
pub(crate) fn subproblem_rhs(obs: &SparseObservations, h: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let mut b = h * rho;
    for &(i, j, v) in obs.entries() {
        b[(i, j)] += v;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rho: f64) -> SolverConfig {
        SolverConfig {
            rho,
            cg_tol: 1e-13,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn no_observations_no_graphs_returns_h() {
        let obs = SparseObservations::empty(3, 2);
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -3.0, 4.0, 0.5, 6.0]);
        let (y, rep) = y_subproblem(&obs, None, None, &h, &cfg(2.0), &DMatrix::zeros(3, 2)).unwrap();
        assert!((y - &h).norm() < 1e-12);
        assert!(rep.converged);
    }

    #[test]
    fn fully_observed_is_elementwise_average() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 3.0, 2.0]);
        let obs = SparseObservations::fully_observed(&m);
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 4.0]);
        let rho = 0.5;
        let (y, _) = y_subproblem(&obs, None, None, &h, &cfg(rho), &DMatrix::zeros(2, 2)).unwrap();
        let want = (&m + &h * rho) / (1.0 + rho);
        assert!((y - want).norm() < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let obs = SparseObservations::empty(2, 2);
        let (y, rep) =
            y_subproblem(&obs, None, None, &DMatrix::zeros(2, 2), &cfg(1.0), &DMatrix::from_element(2, 2, 3.0))
                .unwrap();
        assert_eq!(y, DMatrix::zeros(2, 2));
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let m = DMatrix::from_fn(6, 5, |i, j| (i * j) as f64);
        let obs = SparseObservations::from_cells(&m, [(0, 0), (2, 3), (5, 4)]).unwrap();
        let g = crate::graphs::WeightedGraph::from_edges(6, (0..5).map(|i| (i, i + 1, 1.0))).unwrap();
        let lr = g.laplacian();
        let c = SolverConfig {
            gamma_r: 5.0,
            cg_max_iter: 1,
            cg_tol: 1e-14,
            ..SolverConfig::default()
        };
        let h = DMatrix::from_fn(6, 5, |i, j| (i + 2 * j) as f64);
        let (_, rep) = y_subproblem(&obs, Some(&lr), None, &h, &c, &DMatrix::zeros(6, 5)).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn rejects_graph_of_wrong_size() {
        let obs = SparseObservations::empty(3, 2);
        let g = crate::graphs::WeightedGraph::empty(4);
        let l = g.laplacian();
        let h = DMatrix::zeros(3, 2);
        assert!(y_subproblem(&obs, Some(&l), None, &h, &cfg(1.0), &h).is_err());
    }
}
