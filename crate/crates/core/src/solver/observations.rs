use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Observed entries of an `m × n` matrix as `(row, col, value)` triplets.
///
/// Entries are kept sorted by `(row, col)`; the observation mask is exactly
/// their support and nothing off the support is ever stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseObservations {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseObservations {
    pub fn new(n_rows: usize, n_cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &entries {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidObservations(format!(
                    "entry ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            if v.is_infinite() {
                return Err(Error::InvalidObservations(format!("entry ({i}, {j}) is infinite")));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidObservations(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(SparseObservations {
            n_rows,
            n_cols,
            entries,
        })
    }

    /// An observation set with no entries.
    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        SparseObservations {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    /// Every cell of `m` observed.
    pub fn fully_observed(m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)]))
            .collect();
        SparseObservations {
            n_rows: m.nrows(),
            n_cols: m.ncols(),
            entries,
        }
    }

    /// Reads `m` on the given cells.
    pub fn from_cells(m: &DMatrix<f64>, cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let (r, c) = m.shape();
        let mut entries = Vec::new();
        for (i, j) in cells {
            if i >= r || j >= c {
                return Err(Error::InvalidObservations(format!("cell ({i}, {j}) outside {r}x{c}")));
            }
            entries.push((i, j, m[(i, j)]));
        }
        Self::new(r, c, entries)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Observed fraction of all cells.
    pub fn density(&self) -> f64 {
        let cells = self.n_rows * self.n_cols;
        if cells == 0 {
            0.0
        } else {
            self.len() as f64 / cells as f64
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&(i, j), |&(a, b, _)| (a, b))
            .ok()
            .map(|k| self.entries[k].2)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    /// Sub-collection picked by entry position.
    pub fn select(&self, positions: &[usize]) -> Self {
        let mut entries: Vec<_> = positions.iter().map(|&k| self.entries[k]).collect();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        SparseObservations {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries,
        }
    }

    /// Same cells with values read from `m` instead.
    pub fn with_values_from(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.shape() != self.shape() {
            return Err(Error::dims(
                "observation values",
                format!("{}x{}", self.n_rows, self.n_cols),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(SparseObservations {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().map(|&(i, j, _)| (i, j, m[(i, j)])).collect(),
        })
    }

    /// 0/1 mask matrix.
    pub fn mask(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_rows, self.n_cols);
        for &(i, j, _) in &self.entries {
            a[(i, j)] = 1.0;
        }
        a
    }

    /// Observed values on their cells, zero elsewhere.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_rows, self.n_cols);
        for &(i, j, v) in &self.entries {
            a[(i, j)] = v;
        }
        a
    }

    /// Observed values on their cells, the observed mean elsewhere.
    pub fn mean_filled(&self) -> DMatrix<f64> {
        let mean = if self.is_empty() {
            0.0
        } else {
            self.entries.iter().map(|e| e.2).sum::<f64>() / self.len() as f64
        };
        let mut a = DMatrix::from_element(self.n_rows, self.n_cols, mean);
        for &(i, j, v) in &self.entries {
            a[(i, j)] = v;
        }
        a
    }

    /// Column-major linear positions of the observed cells.
    pub(crate) fn linear_positions(&self) -> Vec<usize> {
        self.entries.iter().map(|&(i, j, _)| j * self.n_rows + i).collect()
    }

    /// Writes `i j value` lines after a `# shape: m n` comment.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# shape: {} {}", self.n_rows, self.n_cols)?;
        for &(i, j, v) in &self.entries {
            writeln!(out, "{i} {j} {v}")?;
        }
        Ok(())
    }

    /// Parses `i j value` lines. The shape comes from `shape` when given,
    /// else from a `# shape: m n` comment, else from the largest indices.
    pub fn read_triplets<R: BufRead>(input: R, source_name: &str, shape: Option<(usize, usize)>) -> Result<Self> {
        let mut header = None;
        let mut entries = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix("# shape:") {
                let dims: Vec<usize> = rest
                    .split_whitespace()
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse(source_name, lineno, format!("bad shape: {e}")))?;
                if dims.len() != 2 {
                    return Err(Error::parse(source_name, lineno, "shape needs two integers"));
                }
                header = Some((dims[0], dims[1]));
                continue;
            }
            if t.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected `i j value`, found {} fields", f.len()),
                ));
            }
            let i: usize = f[0]
                .parse()
                .map_err(|e| Error::parse(source_name, lineno, format!("bad row `{}`: {e}", f[0])))?;
            let j: usize = f[1]
                .parse()
                .map_err(|e| Error::parse(source_name, lineno, format!("bad column `{}`: {e}", f[1])))?;
            let v: f64 = f[2]
                .parse()
                .map_err(|e| Error::parse(source_name, lineno, format!("bad value `{}`: {e}", f[2])))?;
            entries.push((i, j, v));
        }
        let (m, n) = shape.or(header).unwrap_or_else(|| {
            entries.iter().fold((0, 0), |(m, n), &(i, j, _)| (m.max(i + 1), n.max(j + 1)))
        });
        Self::new(m, n, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SparseObservations::new(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseObservations::new(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(SparseObservations::new(2, 2, vec![(0, 1, f64::INFINITY)]).is_err());
    }

    #[test]
    fn lookup_and_mask() {
        let o = SparseObservations::new(2, 3, vec![(1, 2, 4.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(o.get(1, 2), Some(4.0));
        assert_eq!(o.get(1, 1), None);
        assert_eq!(o.mask().sum(), 2.0);
        assert_eq!(o.to_dense()[(0, 1)], 3.0);
        assert_eq!(o.mean_filled()[(0, 0)], 3.5);
        assert_eq!(o.linear_positions(), vec![2, 5]);
    }

    #[test]
    fn triplets_round_trip() {
        let o = SparseObservations::new(3, 4, vec![(0, 3, 0.1), (2, 0, -7.5e-3)]).unwrap();
        let mut buf = Vec::new();
        o.write_triplets(&mut buf).unwrap();
        let back = SparseObservations::read_triplets(&buf[..], "mem", None).unwrap();
        assert_eq!(o, back);
    }

    #[test]
    fn malformed_triplet_line_reports_position() {
        let err = SparseObservations::read_triplets("0 0 1\n0 x 2\n".as_bytes(), "obs.txt", None).unwrap_err();
        assert!(err.to_string().starts_with("obs.txt:2"), "{err}");
    }
}
