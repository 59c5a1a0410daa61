//! Graphs, shift operators and hop neighborhoods.
//!
//! A [`Graph`] is a node count plus a list of weighted arcs. Undirected graphs
//! are stored symmetric-closed, so every undirected edge appears as two arcs.
//! Self-membership in a neighborhood comes from the zero-hop term, never from
//! a self-loop arc, so self-loops are rejected at construction.

mod neighborhood;
pub mod random;
mod shift;

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use neighborhood::{
    build_neighborhood_table, exact_hop_set, extended_neighborhood, hop_distances,
    NeighborhoodTable,
};
pub use shift::{
    adjacency, binary_gso, normalized_adjacency, spectral_radius, ShiftMatrix,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// Largest graph the dense kernels accept.
pub const MAX_NODES: usize = 10_000;

/// Which arcs define a node's hop neighborhood on a directed graph.
///
/// `In` follows arcs into the node (`j` is a 1-hop neighbor of `i` when
/// `j -> i` exists), the same direction the shift `S x` aggregates along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Edge { src, dst, weight }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<Edge>,
    directed: bool,
    in_adj: Vec<Vec<usize>>,
    out_adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a validated graph. Undirected edge lists are symmetric-closed;
    /// listing both orientations of an undirected edge is allowed when the
    /// weights agree.
    pub fn new(n_nodes: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        if n_nodes > MAX_NODES {
            return Err(Error::Validation(format!(
                "{n_nodes} nodes exceeds the dense limit of {MAX_NODES}"
            )));
        }
        let mut arcs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &edges {
            if e.src >= n_nodes || e.dst >= n_nodes {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) out of range for {n_nodes} nodes",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::Validation(format!("self-loop on node {}", e.src)));
            }
            if !e.weight.is_finite() {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has non-finite weight",
                    e.src, e.dst
                )));
            }
            let mut insert = |key: (usize, usize), explicit: bool| -> Result<()> {
                match arcs.get(&key) {
                    Some(&w) if w == e.weight && !(directed && explicit) => Ok(()),
                    Some(_) => Err(Error::Validation(format!(
                        "duplicate edge ({}, {})",
                        key.0, key.1
                    ))),
                    None => {
                        arcs.insert(key, e.weight);
                        Ok(())
                    }
                }
            };
            insert((e.src, e.dst), true)?;
            if !directed {
                insert((e.dst, e.src), false)?;
            }
        }
        let edges: Vec<Edge> = arcs
            .into_iter()
            .map(|((s, d), w)| Edge::new(s, d, w))
            .collect();
        let mut in_adj = vec![Vec::new(); n_nodes];
        let mut out_adj = vec![Vec::new(); n_nodes];
        for e in &edges {
            out_adj[e.src].push(e.dst);
            in_adj[e.dst].push(e.src);
        }
        for list in in_adj.iter_mut() {
            list.sort_unstable();
        }
        Ok(Graph {
            n_nodes,
            edges,
            directed,
            in_adj,
            out_adj,
        })
    }

    /// Recovers the arc structure of a shift operator: `(i, j) != 0` for
    /// `i != j` becomes arc `j -> i` with that weight. The diagonal is dropped.
    pub fn from_shift_pattern(s: &ShiftMatrix, directed: bool) -> Result<Self> {
        let n = s.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = s.get(i, j);
                if i != j && w != 0.0 && (directed || j < i) {
                    edges.push(Edge::new(j, i, w));
                }
            }
        }
        Graph::new(n, edges, directed)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// All arcs, sorted by `(src, dst)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Nodes `j` with an arc `j -> i`, ascending.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_adj[i]
    }

    /// Nodes `j` with an arc `i -> j`, ascending.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_adj[i]
    }

    pub fn neighbors(&self, i: usize, direction: Direction) -> &[usize] {
        match direction {
            Direction::In => self.in_neighbors(i),
            Direction::Out => self.out_neighbors(i),
        }
    }

    /// Degree used for ranking nodes: the neighbor count on undirected
    /// graphs, in-degree plus out-degree on directed ones.
    pub fn degree(&self, i: usize) -> usize {
        if self.directed {
            self.in_adj[i].len() + self.out_adj[i].len()
        } else {
            self.out_adj[i].len()
        }
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_nodes {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n_nodes
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.src], perm[e.dst], e.weight))
            .collect();
        Graph::new(self.n_nodes, edges, self.directed)
    }

    /// True when every node can reach every other ignoring arc direction.
    pub fn is_weakly_connected(&self) -> bool {
        if self.n_nodes == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.in_adj[u].iter().chain(&self.out_adj[u]) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n_nodes
    }

    /// Writes the arcs in the `src dst weight` edge-list format. Undirected
    /// graphs write each edge once, with `src < dst`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# nodes {} {}\n",
            self.n_nodes,
            if self.directed { "directed" } else { "undirected" }
        ));
        for e in &self.edges {
            if self.directed || e.src < e.dst {
                out.push_str(&format!("{} {} {}\n", e.src, e.dst, e.weight));
            }
        }
        out
    }
}

/// Parses a whitespace-separated `src dst [weight]` edge list.
///
/// Blank lines and lines starting with `#` are skipped. The node count is one
/// more than the largest id seen.
pub fn load_edge_list<R: BufRead>(source: R, directed: bool) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `src dst [weight]`, found {} fields", fields.len()),
            });
        }
        let node = |tok: &str| -> Result<usize> {
            let id: i64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid node id `{tok}`"),
            })?;
            if id < 0 {
                return Err(Error::Validation(format!(
                    "negative node id {id} at line {lineno}"
                )));
            }
            Ok(id as usize)
        };
        let src = node(fields[0])?;
        let dst = node(fields[1])?;
        let weight = match fields.get(2) {
            Some(tok) => tok.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid weight `{tok}`"),
            })?,
            None => 1.0,
        };
        max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
        edges.push(Edge::new(src, dst, weight));
    }
    let n_nodes = max_id.map_or(0, |m| m + 1);
    Graph::new(n_nodes, edges, directed)
}
