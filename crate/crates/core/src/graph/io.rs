//! Plain-text edge lists: a `nodes N` header, then one 0-based `i j` pair
//! per line. Blank lines and `#` comments are ignored.

use super::Graph;
use crate::error::{Error, Result};

pub fn to_edge_list(g: &Graph) -> String {
    let mut s = format!("nodes {}\n", g.n_nodes());
    for (i, j) in g.edges() {
        s.push_str(&format!("{i} {j}\n"));
    }
    s
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("line {}: cannot parse {raw:?}", lineno + 1));
        let mut it = line.split_whitespace();
        let (a, b) = (it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?);
        if it.next().is_some() {
            return Err(bad());
        }
        if n.is_none() {
            if a != "nodes" {
                return Err(Error::Parse(format!("line {}: expected `nodes N` header", lineno + 1)));
            }
            n = Some(b.parse::<usize>().map_err(|_| bad())?);
            continue;
        }
        edges.push((a.parse::<usize>().map_err(|_| bad())?, b.parse::<usize>().map_err(|_| bad())?));
    }
    let n = n.ok_or_else(|| Error::Parse("missing `nodes N` header".into()))?;
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Graph::cycle(5);
        assert_eq!(parse_edge_list(&to_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_edge_list("nodes 3\n0 1\n1 x\n").unwrap_err();
        assert!(matches!(e, Error::Parse(ref m) if m.starts_with("line 3")));
        assert!(parse_edge_list("0 1\n").is_err());
        assert!(matches!(parse_edge_list("nodes 2\n0 5\n"), Err(Error::InvalidEdge(0, 5))));
    }
}
