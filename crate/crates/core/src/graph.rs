//! Undirected simple graphs and multigraphs, plus the whitespace edge-list formats.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..vertex_count` with sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            adj: vec![Vec::new(); vertex_count],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list; self-loops are dropped, duplicates and
    /// reversed pairs merged. Fails if an endpoint is out of range.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertex_count];
        for (u, v) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            if u == v {
                continue;
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Self {
            adj,
            edge_count: twice / 2,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        let (a, b) = if self.adj[u as usize].len() <= self.adj[v as usize].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    /// Induced subgraph on `keep`, relabelled `0..keep.len()` in the given order.
    pub fn induced_subgraph(&self, keep: &[u32]) -> Self {
        let mut index = vec![u32::MAX; self.vertex_count()];
        for (new, &old) in keep.iter().enumerate() {
            index[old as usize] = new as u32;
        }
        let edges = self
            .edges()
            .filter(|&(u, v)| index[u as usize] != u32::MAX && index[v as usize] != u32::MAX)
            .map(|(u, v)| (index[u as usize], index[v as usize]));
        Self::from_edges(keep.len(), edges).expect("indices are in range")
    }

    /// Reads `u v` pairs, one per line. `#` starts a comment; blank lines are
    /// skipped. Vertex count is one past the largest id.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<u32> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let fields = data_fields(&line);
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected two vertex ids, found {:?}", line.trim()),
                });
            }
            let u = parse_id(fields[0], idx + 1)?;
            let v = parse_id(fields[1], idx + 1)?;
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let n = max_id.map_or(0, |m| m as usize + 1);
        Self::from_edges(n, edges)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} vertices, {} edges",
            self.vertex_count(),
            self.edge_count()
        )?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

fn data_fields(line: &str) -> Vec<&str> {
    let data = line.split('#').next().unwrap_or("");
    data.split_whitespace().collect()
}

fn parse_id(field: &str, line: usize) -> Result<u32> {
    field.parse::<u32>().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid vertex id {field:?}"),
    })
}

/// Undirected multigraph: each unordered pair carries a positive multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Multigraph {
    vertex_count: usize,
    multiplicity: BTreeMap<(u32, u32), u32>,
}

impl Multigraph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            multiplicity: BTreeMap::new(),
        }
    }

    /// Adds `count` parallel edges between `u` and `v`; self-loops are ignored.
    pub fn add_edges(&mut self, u: u32, v: u32, count: u32) -> Result<()> {
        if u as usize >= self.vertex_count || v as usize >= self.vertex_count {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range")));
        }
        if u == v || count == 0 {
            return Ok(());
        }
        *self.multiplicity.entry(ordered(u, v)).or_insert(0) += count;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn multiplicity(&self, u: u32, v: u32) -> u32 {
        self.multiplicity.get(&ordered(u, v)).copied().unwrap_or(0)
    }

    /// Number of distinct adjacent pairs.
    pub fn distinct_pairs(&self) -> usize {
        self.multiplicity.len()
    }

    /// Number of edges counted with multiplicity.
    pub fn total_edges(&self) -> u64 {
        self.multiplicity.values().map(|&m| m as u64).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        self.multiplicity.iter().map(|(&k, &m)| (k, m))
    }

    /// The simple graph with an edge wherever the multiplicity is positive.
    pub fn collapse(&self) -> Graph {
        Graph::from_edges(self.vertex_count, self.multiplicity.keys().copied()).expect("pairs are in range")
    }

    /// Reads `u v multiplicity` triples; repeated pairs accumulate.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut triples = Vec::new();
        let mut n = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let fields = data_fields(&line);
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected `u v multiplicity`, found {:?}", line.trim()),
                });
            }
            let u = parse_id(fields[0], idx + 1)?;
            let v = parse_id(fields[1], idx + 1)?;
            let m = fields[2].parse::<u32>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid multiplicity {:?}", fields[2]),
            })?;
            n = n.max(u.max(v) as usize + 1);
            triples.push((u, v, m));
        }
        let mut g = Self::new(n);
        for (u, v, m) in triples {
            g.add_edges(u, v, m)?;
        }
        Ok(g)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} vertices, {} distinct pairs",
            self.vertex_count,
            self.distinct_pairs()
        )?;
        for ((u, v), m) in self.pairs() {
            writeln!(out, "{u} {v} {m}")?;
        }
        Ok(())
    }
}

pub(crate) fn ordered(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loader_symmetrizes_and_dedups() {
        let text = "# comment\n0 1\n1 0\n\n2 1 # trailing\n3 3\n";
        let g = Graph::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(3, 3));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Graph::read_edge_list("0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Graph::read_edge_list("0 1\n7\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Multigraph::read_edge_list("0 1 2\n0 1 -1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, vec![(0, 1), (3, 4), (1, 3)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(Graph::read_edge_list(buf.as_slice()).unwrap(), g);

        let mut m = Multigraph::new(3);
        m.add_edges(0, 1, 2).unwrap();
        m.add_edges(2, 1, 1).unwrap();
        let mut buf = Vec::new();
        m.write_edge_list(&mut buf).unwrap();
        assert_eq!(Multigraph::read_edge_list(buf.as_slice()).unwrap(), m);
        assert_eq!(m.total_edges(), 3);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::from_edges(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let h = g.induced_subgraph(&[3, 2, 1]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }
}
