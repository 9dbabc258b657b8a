use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph recording which pairs of players are in a contest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawStructure", into = "RawStructure")]
pub struct Structure {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawStructure {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawStructure> for Structure {
    type Error = Error;

    fn try_from(raw: RawStructure) -> Result<Self> {
        Structure::new(raw.n, &raw.edges)
    }
}

impl From<Structure> for RawStructure {
    fn from(s: Structure) -> Self {
        RawStructure {
            n: s.n,
            edges: s.edges.into_iter().collect(),
        }
    }
}

impl Structure {
    /// Builds a structure, rejecting self-loops, duplicates and bad indices.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            for k in [i, j] {
                if k >= n {
                    return Err(Error::IndexOutOfRange { index: k, n });
                }
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at player {i}")));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidInput(format!("duplicate edge {{{i}, {j}}}")));
            }
        }
        Ok(Self::from_set(n, set))
    }

    fn from_set(n: usize, edges: BTreeSet<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Structure {
            n,
            edges,
            neighbors,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_set(n, BTreeSet::new())
    }

    pub fn complete(n: usize) -> Self {
        let mut set = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                set.insert((i, j));
            }
        }
        Self::from_set(n, set)
    }

    /// Complete multipartite structure; players are numbered class by class.
    pub fn complete_multipartite(sizes: &[usize]) -> Self {
        let labels = class_labels(sizes);
        let n = labels.len();
        let mut set = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] != labels[j] {
                    set.insert((i, j));
                }
            }
        }
        Self::from_set(n, set)
    }

    /// Attackers are `0..a`, victims `a..a+v`.
    pub fn complete_bipartite(a: usize, v: usize) -> Self {
        Self::complete_multipartite(&[a, v])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges as ordered pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Players other than `i` with no contest against `i`.
    pub fn non_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != i && !self.has_edge(i, j))
            .collect()
    }

    pub fn with_edge(&self, i: usize, j: usize) -> Self {
        let mut set = self.edges.clone();
        set.insert((i.min(j), i.max(j)));
        Self::from_set(self.n, set)
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Self {
        let mut set = self.edges.clone();
        set.remove(&(i.min(j), i.max(j)));
        Self::from_set(self.n, set)
    }

    /// Relabels players: player `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let set = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i], perm[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        Self::from_set(self.n, set)
    }

    /// Bit mask over the `n(n−1)/2` possible edges (n ≤ 11).
    pub fn edge_mask(&self) -> u64 {
        let mut m = 0u64;
        for &(i, j) in &self.edges {
            m |= 1 << pair_index(self.n, i, j);
        }
        m
    }

    pub fn from_edge_mask(n: usize, mask: u64) -> Self {
        let mut set = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                if mask >> pair_index(n, i, j) & 1 == 1 {
                    set.insert((i, j));
                }
            }
        }
        Self::from_set(n, set)
    }
}

pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Class index of every player when players are numbered class by class.
pub fn class_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect()
}
