//! File formats: headerless dense CSV, id maps, MovieLens-style ratings,
//! and the ingestion step that carves a target block plus side-information
//! blocks out of a ratings file.

mod ingest;
mod ratings;

pub use ingest::{ingest_ratings, select_near_percentile, IngestConfig, IngestResult};
pub use ratings::{read_ratings, write_ratings, RatingRecord};

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Writes `m` as headerless CSV with round-trippable decimals.
pub fn write_dense_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&m[(i, j)].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_dense_csv<R: BufRead>(input: R, source_name: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(source_name, idx + 1, format!("bad number: {e}")))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    source_name,
                    idx + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

/// Dense 0-based indices for external string ids, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut map = IdMap::default();
        for id in ids {
            let id = id.into();
            if map.index.contains_key(&id) {
                return Err(Error::InvalidObservations(format!("duplicate id `{id}` in id map")));
            }
            map.index.insert(id.clone(), map.ids.len());
            map.ids.push(id);
        }
        Ok(map)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id_of(&self, index: usize) -> Option<&str> {
        self.ids.get(index).map(String::as_str)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// `index external_id` per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, id) in self.ids.iter().enumerate() {
            writeln!(out, "{k} {id}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R, source_name: &str) -> Result<Self> {
        let mut ids = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, id) = t
                .split_once(' ')
                .ok_or_else(|| Error::parse(source_name, idx + 1, "expected `index id`"))?;
            let k: usize = k
                .parse()
                .map_err(|e| Error::parse(source_name, idx + 1, format!("bad index: {e}")))?;
            if k != ids.len() {
                return Err(Error::parse(source_name, idx + 1, format!("index {k} out of sequence")));
            }
            ids.push(id.to_string());
        }
        Self::from_ids(ids)
    }
}
