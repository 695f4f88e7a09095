use std::ops::Range;

use rand::Rng;

use super::{DegreePmf, MultiGraph, MultiGraphBuilder, Sampler};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub type NodeId = usize;

const NONE: u32 = u32::MAX;
const ROOT_KEY: u64 = 0x243F_6A88_85A3_08D3;

#[derive(Debug, Clone)]
enum Generator {
    Pmf(Sampler),
    /// Offspring of generation `i` is `seq[i]`, repeating the last entry.
    Sst(Vec<usize>),
    /// Explicit children lists; node keys are indices into it.
    Fixed(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: u32,
    depth: u32,
    offspring: u32,
    first_child: u32,
    key: u64,
}

/// Rooted tree whose vertices are materialised on demand.
///
/// A node's offspring count is fixed when the node is created, from a random stream
/// keyed by its Ulam-Harris position, so the realised tree never depends on the
/// order in which vertices are expanded.
#[derive(Debug, Clone)]
pub struct LazyTree {
    generator: Generator,
    seed: u64,
    max_depth: usize,
    nodes: Vec<Node>,
}

pub fn sample_gw_tree<R: Rng + ?Sized>(pmf: &DegreePmf, max_depth: usize, rng: &mut R) -> LazyTree {
    LazyTree::new(Generator::Pmf(pmf.sampler()), rng.random(), max_depth)
}

/// Spherically symmetric tree: every vertex of generation `i` has `offspring_seq[i]`
/// children (the last entry repeats).
pub fn build_sst(offspring_seq: &[usize], depth: usize) -> Result<LazyTree> {
    if offspring_seq.is_empty() {
        return Err(Error::InvalidInput("empty offspring sequence".into()));
    }
    Ok(LazyTree::new(Generator::Sst(offspring_seq.to_vec()), 0, depth))
}

impl LazyTree {
    fn new(generator: Generator, seed: u64, max_depth: usize) -> Self {
        let mut t = Self { generator, seed, max_depth, nodes: Vec::new() };
        let key = match t.generator {
            Generator::Fixed(_) => 0,
            _ => ROOT_KEY,
        };
        let off = t.draw_offspring(key, 0);
        t.nodes.push(Node { parent: NONE, depth: 0, offspring: off, first_child: NONE, key });
        t
    }

    /// Fully specified tree from children lists (node 0 is the root).
    pub fn from_children(children: Vec<Vec<usize>>, max_depth: usize) -> Result<Self> {
        let n = children.len();
        let mut seen = vec![false; n];
        for c in children.iter().flatten() {
            if *c >= n || *c == 0 || std::mem::replace(&mut seen[*c], true) {
                return Err(Error::InvalidInput(format!("children lists do not form a tree at {c}")));
            }
        }
        Ok(Self::new(Generator::Fixed(children), 0, max_depth))
    }

    /// Tree from a parent array (`None` only at the root).
    pub fn from_parents(parents: &[Option<usize>], max_depth: usize) -> Result<Self> {
        let root = parents.iter().position(|p| p.is_none()).ok_or_else(|| Error::InvalidInput("no root".into()))?;
        if root != 0 || parents.iter().filter(|p| p.is_none()).count() != 1 {
            return Err(Error::InvalidInput("root must be vertex 0 and unique".into()));
        }
        let mut children = vec![Vec::new(); parents.len()];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        Self::from_children(children, max_depth)
    }

    fn draw_offspring(&self, key: u64, depth: usize) -> u32 {
        match &self.generator {
            Generator::Pmf(s) => s.sample(&mut rng_from_seed(derive_seed(self.seed, &[key]))) as u32,
            Generator::Sst(seq) => seq[depth.min(seq.len() - 1)] as u32,
            Generator::Fixed(ch) => ch[key as usize].len() as u32,
        }
    }

    fn child_key(&self, parent_key: u64, i: usize) -> u64 {
        match &self.generator {
            Generator::Fixed(ch) => ch[parent_key as usize][i] as u64,
            _ => derive_seed(parent_key, &[i as u64]),
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Number of materialised nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.nodes[v].depth as usize
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.nodes[v].parent;
        (p != NONE).then_some(p as usize)
    }

    pub fn offspring(&self, v: NodeId) -> usize {
        self.nodes[v].offspring as usize
    }

    /// Graph degree: offspring plus one for the parent edge.
    pub fn degree(&self, v: NodeId) -> usize {
        self.offspring(v) + usize::from(self.parent(v).is_some())
    }

    /// Key identifying the node's position; for explicit trees, the input index.
    pub fn key(&self, v: NodeId) -> u64 {
        self.nodes[v].key
    }

    pub fn is_boundary(&self, v: NodeId) -> bool {
        self.depth(v) >= self.max_depth
    }

    pub fn is_expanded(&self, v: NodeId) -> bool {
        self.nodes[v].first_child != NONE || self.nodes[v].offspring == 0
    }

    /// Children of an expanded node.
    pub fn children(&self, v: NodeId) -> Option<Range<NodeId>> {
        let n = self.nodes[v];
        if n.offspring == 0 {
            return Some(0..0);
        }
        (n.first_child != NONE).then(|| n.first_child as usize..(n.first_child + n.offspring) as usize)
    }

    /// Materialises the children of `v` (idempotent). Boundary vertices are capped
    /// and return an empty range.
    pub fn expand(&mut self, v: NodeId) -> Range<NodeId> {
        if let Some(r) = self.children(v) {
            return r;
        }
        if self.is_boundary(v) {
            return 0..0;
        }
        let node = self.nodes[v];
        let first = self.nodes.len();
        let depth = node.depth as usize + 1;
        for i in 0..node.offspring as usize {
            let key = self.child_key(node.key, i);
            let off = self.draw_offspring(key, depth);
            self.nodes.push(Node { parent: v as u32, depth: depth as u32, offspring: off, first_child: NONE, key });
        }
        self.nodes[v].first_child = first as u32;
        first..first + node.offspring as usize
    }

    /// Expands every vertex of depth `< depth`; fails if more than `budget` nodes
    /// would be materialised.
    pub fn expand_to(&mut self, depth: usize, budget: usize) -> Result<()> {
        let depth = depth.min(self.max_depth);
        let mut frontier = vec![self.root()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &v in &frontier {
                let off = self.offspring(v);
                if self.children(v).is_none() && self.len() + off > budget {
                    return Err(Error::Budget(format!("tree exceeds {budget} nodes")));
                }
                next.extend(self.expand(v));
            }
            frontier = next;
        }
        Ok(())
    }

    /// Vertices of generation `n` (expanding as needed).
    pub fn generation(&mut self, n: usize, budget: usize) -> Result<Vec<NodeId>> {
        if n > self.max_depth {
            return Ok(Vec::new());
        }
        self.expand_to(n, budget)?;
        let mut frontier = vec![self.root()];
        for _ in 0..n {
            frontier = frontier.iter().flat_map(|&v| self.children(v).unwrap_or(0..0)).collect();
        }
        Ok(frontier)
    }

    /// `|Gen_0|, …, |Gen_n|`.
    pub fn generation_sizes(&mut self, n: usize, budget: usize) -> Result<Vec<usize>> {
        self.expand_to(n, budget)?;
        let mut sizes = vec![1];
        let mut frontier = vec![self.root()];
        for _ in 0..n.min(self.max_depth) {
            frontier = frontier.iter().flat_map(|&v| self.children(v).unwrap_or(0..0)).collect();
            sizes.push(frontier.len());
        }
        Ok(sizes)
    }

    /// Path from the root to `v`, inclusive.
    pub fn geodesic(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Materialised nodes of depth `≤ depth` as a multigraph, with graph index → node id.
    pub fn to_multigraph(&self, depth: usize) -> (MultiGraph, Vec<NodeId>) {
        let ids: Vec<NodeId> = (0..self.len()).filter(|&v| self.depth(v) <= depth).collect();
        let mut index = vec![usize::MAX; self.len()];
        for (i, &v) in ids.iter().enumerate() {
            index[v] = i;
        }
        let mut b = MultiGraphBuilder::new(ids.len());
        for &v in &ids {
            if let Some(p) = self.parent(v) {
                b.add_edge(index[p], index[v]);
            }
        }
        (b.build(), ids)
    }
}
