use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Finite undirected multigraph with loops. A loop adds 2 to the degree.
///
/// Adjacency is stored in CSR form, one `(neighbour, multiplicity)` entry per
/// distinct neighbour, sorted by neighbour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    offsets: Vec<usize>,
    adj: Vec<(u32, u32)>,
    loops: Vec<u32>,
    degree: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct MultiGraphBuilder {
    n: usize,
    pairs: Vec<(u32, u32)>,
}

impl MultiGraphBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, pairs: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> &mut Self {
        self.add_edges(u, v, 1)
    }

    pub fn add_edges(&mut self, u: usize, v: usize, mult: u32) -> &mut Self {
        assert!(u < self.n && v < self.n, "edge ({u},{v}) out of range for n = {}", self.n);
        let (a, b) = if u <= v { (u as u32, v as u32) } else { (v as u32, u as u32) };
        for _ in 0..mult {
            self.pairs.push((a, b));
        }
        self
    }

    pub fn build(mut self) -> MultiGraph {
        self.pairs.sort_unstable();
        let n = self.n;
        let mut loops = vec![0u32; n];
        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut i = 0;
        while i < self.pairs.len() {
            let p = self.pairs[i];
            let mut j = i;
            while j < self.pairs.len() && self.pairs[j] == p {
                j += 1;
            }
            let m = (j - i) as u32;
            let (a, b) = p;
            if a == b {
                loops[a as usize] += m;
            } else {
                lists[a as usize].push((b, m));
                lists[b as usize].push((a, m));
            }
            i = j;
        }
        MultiGraph::from_lists(lists, loops)
    }
}

impl MultiGraph {
    fn from_lists(mut lists: Vec<Vec<(u32, u32)>>, loops: Vec<u32>) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        let mut degree = Vec::with_capacity(n);
        offsets.push(0);
        for (v, l) in lists.iter_mut().enumerate() {
            l.sort_unstable();
            let d: usize = l.iter().map(|e| e.1 as usize).sum::<usize>() + 2 * loops[v] as usize;
            degree.push(d);
            adj.extend_from_slice(l);
            offsets.push(adj.len());
        }
        Self { offsets, adj, loops, degree }
    }

    pub fn empty(n: usize) -> Self {
        MultiGraphBuilder::new(n).build()
    }

    /// Builds from `(u, v)` pairs, one per edge; `u == v` is a loop.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut b = MultiGraphBuilder::new(n);
        for (u, v) in edges {
            b.add_edge(u, v);
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.degree.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn loops(&self, v: usize) -> u32 {
        self.loops[v]
    }

    /// Distinct non-loop neighbours of `v` with edge multiplicities.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `e(u,v)`; for `u == v` the number of loops at `u`.
    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        if u == v {
            return self.loops[u];
        }
        let nb = self.neighbors(u);
        nb.binary_search_by_key(&(v as u32), |e| e.0).map(|i| nb[i].1).unwrap_or(0)
    }

    /// Number of edges, loops included.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|e| e.1 as usize).sum::<usize>() / 2 + self.loops.iter().map(|&l| l as usize).sum::<usize>()
    }

    pub fn half_edge_count(&self) -> usize {
        self.degree.iter().sum()
    }

    /// Largest multiplicity between distinct vertices.
    pub fn max_multiplicity(&self) -> u32 {
        self.adj.iter().map(|e| e.1).max().unwrap_or(0)
    }

    /// Non-loop edges as `(u, v, mult)` with `u < v`, then loops as `(u, u, count)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let pairs = (0..self.n()).flat_map(move |u| {
            self.neighbors(u).iter().filter(move |e| (e.0 as usize) > u).map(move |e| (u, e.0 as usize, e.1))
        });
        let loops = (0..self.n()).filter(|&u| self.loops[u] > 0).map(|u| (u, u, self.loops[u]));
        pairs.chain(loops)
    }

    pub fn is_simple(&self) -> bool {
        self.loops.iter().all(|&l| l == 0) && self.adj.iter().all(|e| e.1 == 1)
    }

    /// Checks `d_v = Σ_{u≠v} e(u,v) + 2·loops(v)` and symmetry.
    pub fn check_invariants(&self) -> Result<()> {
        for v in 0..self.n() {
            let s: usize = self.neighbors(v).iter().map(|e| e.1 as usize).sum();
            if s + 2 * self.loops[v] as usize != self.degree[v] {
                return Err(Error::InvalidInput(format!("degree identity fails at {v}")));
            }
            for &(u, m) in self.neighbors(v) {
                if self.multiplicity(u as usize, v) != m {
                    return Err(Error::InvalidInput(format!("asymmetric edge ({v},{u})")));
                }
            }
        }
        Ok(())
    }

    /// Induced subgraph on `keep`; returns it with the map new index → old index.
    pub fn induced_subgraph(&self, keep: &[bool]) -> (MultiGraph, Vec<usize>) {
        let map: Vec<usize> = (0..self.n()).filter(|&v| keep[v]).collect();
        let mut new_id = vec![u32::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            new_id[v] = i as u32;
        }
        let lists = map
            .iter()
            .map(|&v| {
                self.neighbors(v).iter().filter(|e| keep[e.0 as usize]).map(|e| (new_id[e.0 as usize], e.1)).collect()
            })
            .collect();
        let loops = map.iter().map(|&v| self.loops[v]).collect();
        (MultiGraph::from_lists(lists, loops), map)
    }

    /// Adds edges to a copy of the graph.
    pub fn with_extra_edges(&self, extra: &[(usize, usize)]) -> MultiGraph {
        let mut b = MultiGraphBuilder::new(self.n());
        for (u, v, m) in self.edges() {
            b.add_edges(u, v, m);
        }
        for &(u, v) in extra {
            b.add_edge(u, v);
        }
        b.build()
    }

    /// Breadth-first distances from `root` (`usize::MAX` when unreachable).
    pub fn bfs_distances(&self, root: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = std::collections::VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in self.neighbors(u) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices within distance `r` of `v`, with distances, in BFS order.
    pub fn ball(&self, v: usize, r: usize) -> Vec<(usize, usize)> {
        let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = vec![(v, 0)];
        dist.insert(v, 0);
        let mut head = 0;
        while head < order.len() {
            let (u, d) = order[head];
            head += 1;
            if d == r {
                continue;
            }
            for &(w, _) in self.neighbors(u) {
                let w = w as usize;
                if let Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    order.push((w, d + 1));
                }
            }
        }
        order
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(w, _) in self.neighbors(u) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w as usize);
                    }
                }
            }
        }
        count
    }
}
