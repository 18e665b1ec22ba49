use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Result of singular value soft-thresholding.
#[derive(Debug, Clone)]
pub struct SvtOutput {
    pub matrix: DMatrix<f64>,
    /// Number of singular values strictly above the threshold.
    pub rank: usize,
    /// Nuclear norm of `matrix`, i.e. the sum of the shrunk singular values.
    pub nuclear_norm: f64,
}

/// `sign(λ) · max(0, |λ| - η)`.
pub fn soft_threshold(lambda: f64, eta: f64) -> f64 {
    lambda.signum() * (lambda.abs() - eta).max(0.0)
}

/// Proximal operator of `η‖·‖_*`: shrinks every singular value of `h` by
/// `eta` and rebuilds from the surviving components.
pub fn svt_prox(h: &DMatrix<f64>, eta: f64) -> Result<DMatrix<f64>> {
    svt_prox_detailed(h, eta).map(|o| o.matrix)
}

pub fn svt_prox_detailed(h: &DMatrix<f64>, eta: f64) -> Result<SvtOutput> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::param("threshold", format!("must be finite and >= 0, got {eta}")));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svt_prox input"));
    }
    if h.is_empty() {
        return Ok(SvtOutput {
            matrix: h.clone(),
            rank: 0,
            nuclear_norm: 0.0,
        });
    }
    let (m, n) = h.shape();
    let svd = faer::MatRef::from_column_major_slice(h.as_slice(), m, n)
        .thin_svd()
        .map_err(|_| Error::Diverged {
            iteration: 0,
            detail: "singular value decomposition did not converge".into(),
        })?;
    let (u, v, sigma) = (svd.U(), svd.V(), svd.S().column_vector());
    let kept: Vec<(usize, f64)> = (0..sigma.nrows())
        .map(|k| (k, soft_threshold(sigma[k], eta)))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    let rank = kept.len();
    let nuclear_norm = kept.iter().map(|&(_, s)| s).sum();
    let us = DMatrix::from_fn(m, rank, |i, c| u[(i, kept[c].0)] * kept[c].1);
    let vt = DMatrix::from_fn(rank, n, |c, j| v[(j, kept[c].0)]);
    let out = us * vt;
    Ok(SvtOutput {
        matrix: out,
        rank,
        nuclear_norm,
    })
}

/// Sum of singular values.
pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    faer::MatRef::from_column_major_slice(x.as_slice(), x.nrows(), x.ncols())
        .singular_values()
        .map(|s| s.iter().sum())
        .unwrap_or_else(|_| x.singular_values().iter().sum())
}
