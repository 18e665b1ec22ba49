use nalgebra::DMatrix;

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Which side of the matrix a Laplacian multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Row graph: `L · X`, with `L` of size `m × m`.
    Left,
    /// Column graph: `X · L`, with `L` of size `n × n`.
    Right,
}

/// `L = D - W` for a borrowed graph. Never stored densely; applying it
/// costs one pass over the edge list per column (or row) of the operand.
#[derive(Debug, Clone)]
pub struct Laplacian<'g> {
    graph: &'g WeightedGraph,
    degree: Vec<f64>,
}

impl<'g> Laplacian<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let degree = (0..graph.n_vertices()).map(|v| graph.degree(v)).collect();
        Laplacian { graph, degree }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    pub(crate) fn check(&self, x: &DMatrix<f64>, side: Side) -> Result<()> {
        let (m, n) = x.shape();
        let want = match side {
            Side::Left => m,
            Side::Right => n,
        };
        if want != self.dim() {
            let ctx = match side {
                Side::Left => "row Laplacian (L·X needs X.rows == vertices)",
                Side::Right => "column Laplacian (X·L needs X.cols == vertices)",
            };
            return Err(Error::dims(
                ctx,
                format!("{} vertices", self.dim()),
                format!("{m}x{n} matrix"),
            ));
        }
        Ok(())
    }

    /// `L · X` (`Side::Left`) or `X · L` (`Side::Right`).
    pub fn apply(&self, x: &DMatrix<f64>, side: Side) -> Result<DMatrix<f64>> {
        self.check(x, side)?;
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        self.apply_into(x, side, 1.0, &mut out);
        Ok(out)
    }

    /// Accumulates `scale · L·X` or `scale · X·L` into `out`. Dimensions are
    /// assumed checked. Evaluated as `Σ_j w_ij (x_i - x_j)` so that signals
    /// constant over a component map to exact zeros.
    pub(crate) fn apply_into(&self, x: &DMatrix<f64>, side: Side, scale: f64, out: &mut DMatrix<f64>) {
        let m = x.nrows();
        match side {
            Side::Left => {
                // column-major: each column of X is an independent signal on the row graph
                for c in 0..x.ncols() {
                    let xc = &x.as_slice()[c * m..(c + 1) * m];
                    let oc = &mut out.as_mut_slice()[c * m..(c + 1) * m];
                    for i in 0..m {
                        let xi = xc[i];
                        let mut acc = 0.0;
                        for (j, w) in self.graph.neighbors(i) {
                            acc += w * (xi - xc[j]);
                        }
                        oc[i] += scale * acc;
                    }
                }
            }
            Side::Right => {
                let xs = x.as_slice();
                let os = out.as_mut_slice();
                for j in 0..x.ncols() {
                    let xj = &xs[j * m..(j + 1) * m];
                    let oj = &mut os[j * m..(j + 1) * m];
                    for (k, w) in self.graph.neighbors(j) {
                        let f = scale * w;
                        let xk = &xs[k * m..(k + 1) * m];
                        for ((o, a), b) in oj.iter_mut().zip(xj).zip(xk) {
                            *o += f * (a - b);
                        }
                    }
                }
            }
        }
    }

    /// Graph Dirichlet energy: `tr(Xᵀ L X)` for the row graph, `tr(X L Xᵀ)`
    /// for the column graph.
    pub fn dirichlet_energy(&self, x: &DMatrix<f64>, side: Side) -> Result<f64> {
        let lx = self.apply(x, side)?;
        Ok(x.dot(&lx))
    }

    /// Dense `D - W`, for diagnostics and test oracles only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut l = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.degree));
        for (u, v, w) in self.graph.edges() {
            l[(u, v)] -= w;
            l[(v, u)] -= w;
        }
        debug_assert_eq!(l.nrows(), n);
        l
    }
}
