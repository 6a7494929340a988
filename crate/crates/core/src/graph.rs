use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are stored as given (order matters only for iteration); each is
    /// an unordered pair of distinct vertices and may appear once.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Graph { vertices, edges })
    }

    pub fn empty(vertices: usize) -> Result<Self> {
        Self::new(vertices, Vec::new())
    }

    pub fn cycle(vertices: usize) -> Result<Self> {
        Self::new(vertices, (0..vertices).map(|i| (i, (i + 1) % vertices)).collect())
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parses the `u v` per-line edge-list format. `#` starts a comment; a
    /// comment of the form `# vertices: N` fixes the vertex count, otherwise
    /// it is one more than the largest label.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut vertices: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let (body, comment) = match raw.find('#') {
                Some(i) => (&raw[..i], Some(&raw[i + 1..])),
                None => (raw, None),
            };
            if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("vertices:")) {
                vertices = Some(rest.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad vertex count", lineno + 1))
                })?);
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            match fields.as_slice() {
                [] => {}
                [a, b] => {
                    let parse = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("line {}: bad vertex '{s}'", lineno + 1)))
                    };
                    edges.push((parse(a)?, parse(b)?));
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected 'u v', got '{}'",
                        lineno + 1,
                        body.trim()
                    )))
                }
            }
        }
        let vertices = vertices
            .or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max())
            .ok_or_else(|| Error::Parse("empty edge list without vertex count".into()))?;
        Self::new(vertices, edges)
    }

    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# vertices: {}", self.vertices)?;
        for (a, b) in &self.edges {
            writeln!(f, "{a} {b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(2, vec![(0, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::cycle(5).unwrap();
        let text = g.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        let iso = Graph::parse_edge_list("# vertices: 4\n").unwrap();
        assert_eq!(iso.vertices(), 4);
        assert!(Graph::parse_edge_list("0 1 2\n").is_err());
    }
}
