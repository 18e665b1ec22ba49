use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One line of a ratings file.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

/// Parses `user<d>item<d>rating[<d>timestamp]` lines, `<d>` being
/// `delimiter` (`::` for MovieLens 10M). Ratings outside `range` are
/// rejected. An input without any record is an error.
pub fn read_ratings<R: BufRead>(
    input: R,
    source_name: &str,
    delimiter: &str,
    range: (f64, f64),
) -> Result<Vec<RatingRecord>> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split(delimiter).map(str::trim).collect();
        if f.len() != 3 && f.len() != 4 {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("expected 3 or 4 fields separated by `{delimiter}`, found {}", f.len()),
            ));
        }
        if f[0].is_empty() || f[1].is_empty() {
            return Err(Error::parse(source_name, lineno, "empty user or item id"));
        }
        let rating: f64 = f[2]
            .parse()
            .map_err(|e| Error::parse(source_name, lineno, format!("bad rating `{}`: {e}", f[2])))?;
        if !(rating >= range.0 && rating <= range.1) {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("rating {rating} outside [{}, {}]", range.0, range.1),
            ));
        }
        let timestamp = match f.get(3) {
            Some(s) => Some(
                s.parse::<i64>()
                    .map_err(|e| Error::parse(source_name, lineno, format!("bad timestamp `{s}`: {e}")))?,
            ),
            None => None,
        };
        records.push(RatingRecord {
            user: f[0].to_string(),
            item: f[1].to_string(),
            rating,
            timestamp,
        });
    }
    if records.is_empty() {
        return Err(Error::parse(source_name, 0, "no rating records found"));
    }
    Ok(records)
}

pub fn write_ratings<W: Write>(records: &[RatingRecord], delimiter: &str, mut out: W) -> Result<()> {
    for r in records {
        match r.timestamp {
            Some(ts) => writeln!(out, "{}{d}{}{d}{}{d}{}", r.user, r.item, r.rating, ts, d = delimiter)?,
            None => writeln!(out, "{}{d}{}{d}{}", r.user, r.item, r.rating, d = delimiter)?,
        }
    }
    Ok(())
}
