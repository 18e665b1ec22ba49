use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{IdMap, RatingRecord};
use crate::error::{Error, Result};
use crate::solver::SparseObservations;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub target_rows: usize,
    pub target_cols: usize,
    /// Frequency percentile (0..=100) around which users are picked.
    pub row_percentile: f64,
    /// Frequency percentile (0..=100) around which movies are picked.
    pub col_percentile: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            target_rows: 500,
            target_cols: 500,
            row_percentile: 99.0,
            col_percentile: 95.0,
        }
    }
}

/// The target block `M` (selected users × selected movies) and the two
/// side blocks: `F_u` (selected users × remaining movies) and `F_m`
/// (remaining users × selected movies). Ratings of remaining users on
/// remaining movies are dropped.
#[derive(Debug, Clone)]
pub struct IngestResult {
    pub target: SparseObservations,
    pub user_features: SparseObservations,
    pub movie_features: SparseObservations,
    pub users: IdMap,
    pub movies: IdMap,
    pub other_users: IdMap,
    pub other_movies: IdMap,
}

impl IngestResult {
    pub fn density(&self) -> f64 {
        self.target.density()
    }
}

fn cmp_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Ids ordered by increasing rating count, ties by id.
fn by_frequency<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for id in ids {
        *counts.entry(id).or_default() += 1;
    }
    let mut v: Vec<(String, usize)> = counts.into_iter().map(|(k, c)| (k.to_string(), c)).collect();
    v.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| cmp_ids(&a.0, &b.0)));
    v
}

/// Positions of `count` consecutive entries of a sorted list of length `len`
/// centered on the `percentile` rank, shifted inward at the ends.
pub fn select_near_percentile(len: usize, count: usize, percentile: f64) -> Result<std::ops::Range<usize>> {
    if count == 0 || count > len {
        return Err(Error::param(
            "target size",
            format!("cannot pick {count} entities out of {len}"),
        ));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::param("percentile", format!("must lie in [0, 100], got {percentile}")));
    }
    let center = percentile / 100.0 * (len - 1) as f64;
    let start = (center - (count - 1) as f64 / 2.0).round().max(0.0) as usize;
    let start = start.min(len - count);
    Ok(start..start + count)
}

pub fn ingest_ratings(records: &[RatingRecord], cfg: &IngestConfig) -> Result<IngestResult> {
    if records.is_empty() {
        return Err(Error::Empty("no ratings to ingest".into()));
    }
    let users_sorted = by_frequency(records.iter().map(|r| r.user.as_str()));
    let movies_sorted = by_frequency(records.iter().map(|r| r.item.as_str()));
    let ur = select_near_percentile(users_sorted.len(), cfg.target_rows, cfg.row_percentile)?;
    let mr = select_near_percentile(movies_sorted.len(), cfg.target_cols, cfg.col_percentile)?;

    let pick = |sorted: &[(String, usize)], r: &std::ops::Range<usize>, inside: bool| {
        IdMap::from_ids(
            sorted
                .iter()
                .enumerate()
                .filter(|(k, _)| r.contains(k) == inside)
                .map(|(_, (id, _))| id.clone()),
        )
    };
    let users = pick(&users_sorted, &ur, true)?;
    let movies = pick(&movies_sorted, &mr, true)?;
    let other_users = pick(&users_sorted, &ur, false)?;
    let other_movies = pick(&movies_sorted, &mr, false)?;

    let (mut t, mut fu, mut fm) = (Vec::new(), Vec::new(), Vec::new());
    for r in records {
        match (users.index_of(&r.user), movies.index_of(&r.item)) {
            (Some(i), Some(j)) => t.push((i, j, r.rating)),
            (Some(i), None) => fu.push((i, other_movies.index_of(&r.item).expect("partitioned"), r.rating)),
            (None, Some(j)) => fm.push((other_users.index_of(&r.user).expect("partitioned"), j, r.rating)),
            (None, None) => {}
        }
    }
    Ok(IngestResult {
        target: SparseObservations::new(users.len(), movies.len(), t)?,
        user_features: SparseObservations::new(users.len(), other_movies.len(), fu)?,
        movie_features: SparseObservations::new(other_users.len(), movies.len(), fm)?,
        users,
        movies,
        other_users,
        other_movies,
    })
}
