//! Plain-text edge lists.
//!
//! The first line is `n m`, followed by `m` lines `u v` (0-based) or, for the
//! weighted variant, `u v w` with `w` a decimal float.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weights::WeightAssignment;

pub fn parse_edge_list(text: &str) -> Result<(Graph, Option<WeightAssignment>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            message: "header must be `n m`".into(),
        });
    }
    let n = parse_usize(head[0], hline)?;
    let m = parse_usize(head[1], hline)?;

    let mut edges = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut weighted = None;
    for (line, l) in lines.by_ref().take(m) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let has_weight = match fields.len() {
            2 => false,
            3 => true,
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "expected `u v` or `u v w`".into(),
                })
            }
        };
        if *weighted.get_or_insert(has_weight) != has_weight {
            return Err(Error::Parse {
                line,
                message: "mixed weighted and unweighted lines".into(),
            });
        }
        edges.push((parse_usize(fields[0], line)?, parse_usize(fields[1], line)?));
        if has_weight {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight `{}`", fields[2]),
            })?;
            weights.push(w);
        }
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hline,
            message: format!("header promises {m} edges, found {}", edges.len()),
        });
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "trailing content after the edge list".into(),
        });
    }
    let graph = Graph::new(n, &edges)?;
    let weights = match weighted {
        Some(true) => Some(WeightAssignment::for_graph(&graph, weights)?),
        _ => None,
    };
    Ok((graph, weights))
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad integer `{s}`"),
    })
}

pub fn write_edge_list(g: &Graph, weights: Option<&WeightAssignment>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.vertex_count(), g.edge_count());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        match weights {
            Some(w) => {
                let _ = writeln!(out, "{u} {v} {}", w.get(e));
            }
            None => {
                let _ = writeln!(out, "{u} {v}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_round_trip() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        let w = WeightAssignment::new(vec![0.1, 2.5, 1e-7]).unwrap();
        let text = write_edge_list(&g, Some(&w));
        let (g2, w2) = parse_edge_list(&text).unwrap();
        assert_eq!(g, g2);
        assert_eq!(Some(w), w2);
    }

    #[test]
    fn unweighted_and_errors() {
        let (g, w) = parse_edge_list("3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(w.is_none());
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(parse_edge_list("3 2\n0 1 1.0\n1 2\n").is_err());
        assert!(parse_edge_list("2 1\n0 0\n").is_err());
        assert!(parse_edge_list("2 1\n0 1 -1\n").is_err());
    }
}
