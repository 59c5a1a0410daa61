use std::collections::VecDeque;

use super::{Direction, Graph};
use crate::error::{Error, Result};

/// Shortest-path hop distances from `source`, truncated at `max_hop`.
/// Unreached nodes (or nodes farther than `max_hop`) are `None`.
pub fn hop_distances(
    g: &Graph,
    source: usize,
    max_hop: usize,
    direction: Direction,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n_nodes()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        if d == max_hop {
            continue;
        }
        for &v in g.neighbors(u, direction) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Nodes at shortest-path distance exactly `r` from `i`, ascending.
pub fn exact_hop_set(g: &Graph, i: usize, r: usize, direction: Direction) -> Vec<usize> {
    hop_distances(g, i, r, direction)
        .into_iter()
        .enumerate()
        .filter_map(|(j, d)| (d == Some(r)).then_some(j))
        .collect()
}

/// Nodes within `r` hops of `i` (including `i`), ascending.
pub fn extended_neighborhood(g: &Graph, i: usize, r: usize, direction: Direction) -> Vec<usize> {
    hop_distances(g, i, r, direction)
        .into_iter()
        .enumerate()
        .filter_map(|(j, d)| d.is_some().then_some(j))
        .collect()
}

/// Extended neighborhoods for every node and every hop `0..=max_hop`.
///
/// Member lists are sorted ascending and stored separately per hop, so a
/// median kernel gathers one contiguous id list per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodTable {
    max_hop: usize,
    direction: Direction,
    members: Vec<Vec<Vec<usize>>>,
}

impl NeighborhoodTable {
    pub fn max_hop(&self) -> usize {
        self.max_hop
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn n_nodes(&self) -> usize {
        self.members.len()
    }

    /// Extended `r`-hop neighborhood of node `i`.
    pub fn members(&self, i: usize, r: usize) -> &[usize] {
        &self.members[i][r]
    }

    pub fn size(&self, i: usize, r: usize) -> usize {
        self.members[i][r].len()
    }

    /// Largest neighborhood at hop `r`; sizes scratch buffers.
    pub fn max_size(&self, r: usize) -> usize {
        self.members.iter().map(|m| m[r].len()).max().unwrap_or(0)
    }

    pub(crate) fn check_hop(&self, r: usize) -> Result<()> {
        if r > self.max_hop {
            return Err(Error::Validation(format!(
                "hop {r} exceeds neighborhood table reach {}",
                self.max_hop
            )));
        }
        Ok(())
    }
}

/// One truncated BFS per node; the hop-`r` list is every node with distance
/// at most `r`.
pub fn build_neighborhood_table(
    g: &Graph,
    max_hop: usize,
    direction: Direction,
) -> NeighborhoodTable {
    let n = g.n_nodes();
    let mut members = Vec::with_capacity(n);
    let mut dist = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        dist[i] = 0;
        touched.push(i);
        queue.push_back(i);
        while let Some(u) = queue.pop_front() {
            let d = dist[u];
            if d == max_hop {
                continue;
            }
            for &v in g.neighbors(u, direction) {
                if dist[v] == usize::MAX {
                    dist[v] = d + 1;
                    touched.push(v);
                    queue.push_back(v);
                }
            }
        }
        touched.sort_unstable();
        let per_hop: Vec<Vec<usize>> = (0..=max_hop)
            .map(|r| touched.iter().copied().filter(|&j| dist[j] <= r).collect())
            .collect();
        for &j in &touched {
            dist[j] = usize::MAX;
        }
        touched.clear();
        members.push(per_hop);
    }
    NeighborhoodTable {
        max_hop,
        direction,
        members,
    }
}
