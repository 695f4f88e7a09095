use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph_core::{LazyTree, NodeId};

/// Which tree vertices may serve as star centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum StarRule {
    /// Offspring exactly `2K`, as in the branching-process construction.
    #[default]
    ExactOffspring,
    /// Any vertex meeting the degree-factor bound `deg_G ≤ M·deg_H`.
    Ratio,
}

/// A chain `v₁, 𝒫₁, v₂, …` of stars joined by paths, embedded downward in a tree.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StarChain {
    pub centers: Vec<NodeId>,
    /// `paths[i]` is the `ℓ` interior vertices between `centers[i]` and `centers[i+1]`.
    pub paths: Vec<Vec<NodeId>>,
    /// `K` leaves per center.
    pub leaves: Vec<Vec<NodeId>>,
    /// Largest `deg_G(v)/deg_H(v)` over embedded vertices.
    pub max_factor: f64,
    /// The tree exceeded the node budget and was searched as far as materialised.
    pub truncated: bool,
}

impl StarChain {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingParams {
    pub k: usize,
    pub ell: usize,
    pub m: f64,
    pub depth: usize,
    pub rule: StarRule,
    pub budget: usize,
}

const NO: u32 = u32::MAX;

struct Search<'a> {
    t: &'a LazyTree,
    p: EmbeddingParams,
    children: Vec<Vec<NodeId>>,
    // best[inner][x]: stars in the best chain starting at x; inner = x has a path above it.
    best: [Vec<u32>; 2],
    best_next: [Vec<u32>; 2],
    // path[j][y]: stars below when y is a path vertex with j further path vertices below it.
    path: Vec<Vec<u32>>,
    path_next: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn fits(&self, v: NodeId, deg_h: usize) -> bool {
        self.t.degree(v) as f64 <= self.p.m * deg_h as f64
    }

    fn is_leaf(&self, w: NodeId) -> bool {
        self.fits(w, 1)
    }

    fn center_ok(&self, x: NodeId, deg_h: usize) -> bool {
        let shape = match self.p.rule {
            StarRule::ExactOffspring => self.t.offspring(x) == 2 * self.p.k,
            StarRule::Ratio => true,
        };
        shape && self.fits(x, deg_h)
    }

    fn solve(&mut self, order: &[NodeId]) {
        let k = self.p.k;
        for &x in order.iter().rev() {
            let leaf_count = self.children[x].iter().filter(|&&c| self.is_leaf(c)).count();
            let deg_ok = self.fits(x, 2);
            for j in 0..self.p.ell {
                if !deg_ok {
                    continue;
                }
                let table = if j == 0 { &self.best[1] } else { &self.path[j - 1] };
                if let Some((&c, v)) = self.children[x]
                    .iter()
                    .map(|c| (c, table[*c]))
                    .filter(|&(_, v)| v > 0)
                    .max_by_key(|&(c, v)| (v, std::cmp::Reverse(*c)))
                {
                    self.path[j][x] = v;
                    self.path_next[j][x] = c as u32;
                }
            }
            for inner in 0..2 {
                let up = usize::from(inner == 1);
                let mut val = 0;
                let mut next = NO;
                if leaf_count >= k && self.center_ok(x, k + up) {
                    val = 1;
                }
                if self.center_ok(x, k + up + 1) {
                    let table = &self.path[self.p.ell - 1];
                    for &c in &self.children[x] {
                        let leaves_left = leaf_count - usize::from(self.is_leaf(c));
                        if table[c] > 0 && leaves_left >= k && table[c] + 1 > val {
                            val = table[c] + 1;
                            next = c as u32;
                        }
                    }
                }
                self.best[inner][x] = val;
                self.best_next[inner][x] = next;
            }
        }
    }

    fn extract(&self, start: NodeId) -> StarChain {
        let mut chain = StarChain::default();
        let mut x = start;
        let mut inner = 0;
        loop {
            let next = self.best_next[inner][x];
            let up = usize::from(inner == 1);
            let deg_h = self.p.k + up + usize::from(next != NO);
            chain.max_factor = chain.max_factor.max(self.t.degree(x) as f64 / deg_h as f64);
            let leaves: Vec<NodeId> = self.children[x]
                .iter()
                .copied()
                .filter(|&c| c as u32 != next && self.is_leaf(c))
                .take(self.p.k)
                .collect();
            for &w in &leaves {
                chain.max_factor = chain.max_factor.max(self.t.degree(w) as f64);
            }
            chain.centers.push(x);
            chain.leaves.push(leaves);
            if next == NO {
                break;
            }
            let mut y = next as usize;
            let mut interior = Vec::with_capacity(self.p.ell);
            for j in (0..self.p.ell).rev() {
                interior.push(y);
                chain.max_factor = chain.max_factor.max(self.t.degree(y) as f64 / 2.0);
                y = self.path_next[j][y] as usize;
            }
            chain.paths.push(interior);
            x = y;
            inner = 1;
        }
        chain
    }
}

/// Longest downward chain of stars `H_{K,ℓ}` that is `M`-embedded in the tree truncated
/// at `depth`. Heuristic: only downward chains in the materialised part are searched,
/// and an empty chain is a valid answer.
pub fn m_embedding_search(tree: &mut LazyTree, p: EmbeddingParams) -> Result<StarChain> {
    if p.k == 0 || p.ell == 0 || !(p.m >= 1.0) {
        return Err(invalid("embedding needs K ≥ 1, ℓ ≥ 1 and M ≥ 1"));
    }
    let truncated = match tree.expand_to(p.depth, p.budget) {
        Ok(()) => false,
        Err(Error::Budget(_)) => true,
        Err(e) => return Err(e),
    };
    let n = tree.len();
    let order: Vec<NodeId> = (0..n).filter(|&v| tree.depth(v) <= p.depth).collect();
    let mut children = vec![Vec::new(); n];
    for &v in &order {
        if tree.depth(v) < p.depth {
            if let Some(r) = tree.children(v) {
                children[v] = r.collect();
            }
        }
    }
    let mut s = Search {
        t: tree,
        p,
        children,
        best: [vec![0; n], vec![0; n]],
        best_next: [vec![NO; n], vec![NO; n]],
        path: vec![vec![0; n]; p.ell],
        path_next: vec![vec![NO; n]; p.ell],
    };
    s.solve(&order);
    let start =
        order.iter().copied().filter(|&v| s.best[0][v] > 0).max_by_key(|&v| (s.best[0][v], std::cmp::Reverse(v)));
    let mut chain = start.map(|v| s.extract(v)).unwrap_or_default();
    chain.truncated = truncated;
    Ok(chain)
}
