use std::io::{BufRead, Write};

use super::WeightedGraph;
use crate::error::{Error, Result};

const VERTEX_HEADER: &str = "# vertices:";

/// Writes `u v w` lines (0-based, one undirected edge per line) after a
/// `# vertices: N` comment so isolated trailing vertices survive a reload.
pub fn write_edge_list<W: Write>(graph: &WeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "{VERTEX_HEADER} {}", graph.n_vertices())?;
    for (u, v, w) in graph.edges() {
        writeln!(out, "{u} {v} {w}")?;
    }
    Ok(())
}

/// Parses an edge list. The vertex count comes from `n_vertices` when given,
/// else from a `# vertices: N` header, else from the largest index seen.
pub fn read_edge_list<R: BufRead>(
    input: R,
    source_name: &str,
    n_vertices: Option<usize>,
) -> Result<WeightedGraph> {
    let mut header_n = None;
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if let Some(v) = t.strip_prefix(VERTEX_HEADER) {
                let n = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(source_name, lineno, format!("bad vertex count: {e}")))?;
                header_n = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("expected `u v w`, found {} fields", fields.len()),
            ));
        }
        let u: usize = fields[0]
            .parse()
            .map_err(|e| Error::parse(source_name, lineno, format!("bad vertex `{}`: {e}", fields[0])))?;
        let v: usize = fields[1]
            .parse()
            .map_err(|e| Error::parse(source_name, lineno, format!("bad vertex `{}`: {e}", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|e| Error::parse(source_name, lineno, format!("bad weight `{}`: {e}", fields[2])))?;
        if u == v {
            return Err(Error::parse(source_name, lineno, format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::parse(source_name, lineno, format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v, w));
    }
    let inferred = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = n_vertices.or(header_n).unwrap_or(inferred);
    WeightedGraph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_isolated_vertex() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.1), (2, 3, 1.0 / 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(&buf[..], "mem", None).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let err = read_edge_list("# c\n0 1 1\n1 1 2\n".as_bytes(), "g.txt", None).unwrap_err();
        assert!(err.to_string().contains("g.txt:3"), "{err}");
        let err = read_edge_list("0 1 1\n1 0 2\n".as_bytes(), "g.txt", None).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn explicit_vertex_count_wins() {
        let g = read_edge_list("# vertices: 3\n0 1 1\n".as_bytes(), "g", Some(7)).unwrap();
        assert_eq!(g.n_vertices(), 7);
    }
}
