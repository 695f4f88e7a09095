use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph_core::{hash_transform, size_biased, DegreePmf, MultiGraph, MultiGraphBuilder, Sampler};

/// Node of the coupled exploration tree. Ghost nodes carry no graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExplNode {
    pub parent: Option<usize>,
    pub depth: usize,
    pub vertex: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplorationOutput {
    pub root: usize,
    pub radius: usize,
    /// Revealed part of `B_r(v₀)` on local indices.
    #[serde(skip)]
    pub ball: MultiGraph,
    /// Local index → original vertex, in discovery order.
    pub ball_vertices: Vec<usize>,
    /// Distance from the root, per local index.
    pub dist: Vec<usize>,
    pub tree: Vec<ExplNode>,
    /// Tree node of each ball vertex (local index order).
    pub tree_node: Vec<usize>,
    pub collisions: usize,
    pub surplus: usize,
    /// Edges closed by collisions, as original vertex pairs.
    pub surplus_edges: Vec<(usize, usize)>,
    /// `X_s` per exploration step.
    pub forward_degrees: Vec<usize>,
    /// `Y_s` from the hash-transformed law, when the domination coupling is on.
    pub dominating: Vec<usize>,
    pub domination_violations: usize,
    pub steps: usize,
    /// The ghost law fell back to the plain size-biased law (hash transform undefined).
    pub ghost_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct ExploreOptions {
    /// Offspring law of ghost subtrees; defaults to the hash transform of the
    /// size-biased empirical degree law.
    pub ghost_pmf: Option<DegreePmf>,
    pub eta: f64,
    /// Pair each `X_s` with a dominating draw. Enforces the `Σd/17` step limit.
    pub dominate: bool,
    /// Upper bound on tree nodes (including ghosts).
    pub budget: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { ghost_pmf: None, eta: 0.1, dominate: false, budget: 1_000_000 }
    }
}

/// Fenwick tree over degrees holding `d · #undiscovered vertices of degree d`.
struct Fenwick(Vec<i64>);

impl Fenwick {
    fn add(&mut self, i: usize, v: i64) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over indices `≤ i`.
    fn prefix(&self, i: usize) -> i64 {
        let mut i = (i + 1).min(self.0.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

enum Matching {
    /// Uniform pairing revealed lazily: unmatched pool with positions.
    Random {
        pool: Vec<usize>,
        pos: Vec<usize>,
    },
    Fixed(Vec<usize>),
}

impl Matching {
    fn remove(&mut self, h: usize) {
        if let Matching::Random { pool, pos } = self {
            let i = pos[h];
            let last = *pool.last().expect("non-empty pool");
            pool.swap_remove(i);
            if last != h {
                pos[last] = i;
            }
        }
    }

    fn pool_len(&self) -> usize {
        match self {
            Matching::Random { pool, .. } => pool.len(),
            Matching::Fixed(_) => 0,
        }
    }
}

fn default_ghost(deg: &[usize], eta: f64) -> Result<(DegreePmf, bool)> {
    let emp = DegreePmf::empirical(deg)?;
    let sb = size_biased(&emp, false)?;
    match hash_transform(&sb, eta) {
        Ok(h) => Ok((h.pmf, false)),
        Err(Error::NoHashThreshold(_)) => Ok((sb, true)),
        Err(e) => Err(e),
    }
}

/// Breadth-first exploration of `B_r(v₀)` in the configuration model on `deg`,
/// revealing the uniform matching one half-edge at a time.
pub fn explore_neighborhood<R: Rng + ?Sized>(
    deg: &[usize],
    v0: usize,
    r: usize,
    opts: &ExploreOptions,
    rng: &mut R,
) -> Result<ExplorationOutput> {
    let h: usize = deg.iter().sum();
    let matching = Matching::Random { pool: (0..h).collect(), pos: (0..h).collect() };
    explore(deg, matching, v0, r, opts, rng)
}

/// Same exploration on a given multigraph (its half-edge pairing is fixed).
/// Ties are broken by neighbour index.
pub fn explore_graph<R: Rng + ?Sized>(
    g: &MultiGraph,
    v0: usize,
    r: usize,
    opts: &ExploreOptions,
    rng: &mut R,
) -> Result<ExplorationOutput> {
    if opts.dominate {
        return Err(invalid("the domination coupling needs a random matching"));
    }
    let deg = g.degrees().to_vec();
    let mut offset = vec![0usize; g.n() + 1];
    for v in 0..g.n() {
        offset[v + 1] = offset[v] + deg[v];
    }
    let mut next = offset.clone();
    let mut partner = vec![usize::MAX; offset[g.n()]];
    let mut take = |v: usize| {
        let x = next[v];
        next[v] += 1;
        x
    };
    for (u, v, m) in g.edges() {
        for _ in 0..m {
            let (a, b) = (take(u), take(v));
            partner[a] = b;
            partner[b] = a;
        }
    }
    explore(&deg, Matching::Fixed(partner), v0, r, opts, rng)
}

fn explore<R: Rng + ?Sized>(
    deg: &[usize],
    mut matching: Matching,
    v0: usize,
    r: usize,
    opts: &ExploreOptions,
    rng: &mut R,
) -> Result<ExplorationOutput> {
    let n = deg.len();
    if v0 >= n {
        return Err(Error::VertexOutOfRange(v0));
    }
    if r == 0 {
        return Err(invalid("radius must be at least 1"));
    }
    let mut offset = vec![0usize; n + 1];
    for v in 0..n {
        offset[v + 1] = offset[v] + deg[v];
    }
    let total_h = offset[n];
    let owner = |x: usize| offset.partition_point(|&o| o <= x) - 1;

    let mut ghost_fallback = false;
    let mut ghost: Option<Sampler> = None;
    let mut hash: Option<Sampler> = None;
    if let Some(p) = &opts.ghost_pmf {
        ghost = Some(p.sampler());
    }
    let mut fen = Fenwick(vec![0; deg.iter().copied().max().unwrap_or(0) + 2]);
    if opts.dominate {
        let (p, fb) = default_ghost(deg, opts.eta)?;
        if fb {
            return Err(Error::NoHashThreshold("domination coupling needs the hash transform".into()));
        }
        hash = Some(p.sampler());
        for &d in deg {
            fen.add(d, d as i64);
        }
    }

    let mut st = State {
        local: vec![usize::MAX; n],
        ball_vertices: Vec::new(),
        dist: Vec::new(),
        tree: Vec::new(),
        tree_node: Vec::new(),
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut matched = vec![false; total_h];
    let mut active: VecDeque<usize> = VecDeque::new();
    let discover = |st: &mut State,
                    v: usize,
                    d: usize,
                    parent: Option<usize>,
                    skip: Option<usize>,
                    active: &mut VecDeque<usize>,
                    fen: &mut Fenwick| {
        st.local[v] = st.ball_vertices.len();
        st.ball_vertices.push(v);
        st.dist.push(d);
        st.tree_node.push(st.tree.len());
        st.tree.push(ExplNode { parent, depth: d, vertex: Some(v) });
        if opts.dominate {
            fen.add(deg[v], -(deg[v] as i64));
        }
        active.extend((offset[v]..offset[v + 1]).filter(|&x| Some(x) != skip));
    };
    discover(&mut st, v0, 0, None, None, &mut active, &mut fen);

    let mut forward = Vec::new();
    let mut dominating = Vec::new();
    let mut violations = 0;
    let mut collisions = 0;
    let mut surplus_edges = Vec::new();
    let mut steps = 0;
    while let Some(hs) = active.pop_front() {
        if matched[hs] {
            continue;
        }
        let u = owner(hs);
        let lu = st.local[u];
        if st.dist[lu] >= r {
            break;
        }
        steps += 1;
        if opts.dominate && 17 * steps > total_h {
            return Err(Error::Budget(format!("exploration used {steps} steps, above Σd/17 = {}", total_h / 17)));
        }
        matched[hs] = true;
        matching.remove(hs);
        let pool = matching.pool_len();
        let m = match &matching {
            Matching::Random { pool: p, .. } => {
                if p.is_empty() {
                    return Err(invalid("odd number of half-edges"));
                }
                p[rng.random_range(0..p.len())]
            }
            Matching::Fixed(partner) => partner[hs],
        };
        let v = owner(m);
        let x = if st.local[v] == usize::MAX { deg[v] - 1 } else { 0 };
        if let Some(law) = &hash {
            // randomized probability integral transform under the conditional law of X_s
            let pool_f = pool as f64;
            let coll = pool_f - fen.prefix(fen.0.len() - 2) as f64;
            let cdf = |y: i64| if y < 0 { 0.0 } else { (coll + fen.prefix(y as usize + 1) as f64) / pool_f };
            let (lo, hi) = (cdf(x as i64 - 1), cdf(x as i64));
            let u_pit = (lo + rng.random::<f64>() * (hi - lo)).clamp(0.0, 1.0 - 1e-16);
            let y = law.quantile(u_pit);
            dominating.push(y);
            if x > y {
                violations += 1;
            }
        }
        forward.push(x);
        matched[m] = true;
        matching.remove(m);
        if st.local[v] == usize::MAX {
            let parent = st.tree_node[lu];
            let du = st.dist[lu];
            discover(&mut st, v, du + 1, Some(parent), Some(m), &mut active, &mut fen);
            edges.push((lu, st.local[v]));
        } else {
            let lv = st.local[v];
            collisions += 1;
            edges.push((lu, lv));
            surplus_edges.push((u, v));
            if ghost.is_none() {
                let (p, fb) = default_ghost(deg, opts.eta)?;
                ghost_fallback = fb;
                ghost = Some(p.sampler());
            }
            let sampler = ghost.as_ref().expect("ghost law set");
            for (node, levels) in
                [(st.tree_node[lu], r - st.dist[lu]), (st.tree_node[lv], r.saturating_sub(st.dist[lv]))]
            {
                grow_ghost(&mut st.tree, node, levels, sampler, opts.budget, rng)?;
            }
        }
        if st.tree.len() > opts.budget {
            return Err(Error::Budget(format!("exploration tree exceeded {} nodes", opts.budget)));
        }
    }

    let mut b = MultiGraphBuilder::new(st.ball_vertices.len());
    for &(a, c) in &edges {
        b.add_edge(a, c);
    }
    let ball = b.build();
    let surplus = ball.edge_count() + ball.component_count() - ball.n();
    Ok(ExplorationOutput {
        root: v0,
        radius: r,
        ball,
        ball_vertices: st.ball_vertices,
        dist: st.dist,
        tree: st.tree,
        tree_node: st.tree_node,
        collisions,
        surplus,
        surplus_edges,
        forward_degrees: forward,
        dominating,
        domination_violations: violations,
        steps,
        ghost_fallback,
    })
}

struct State {
    local: Vec<usize>,
    ball_vertices: Vec<usize>,
    dist: Vec<usize>,
    tree: Vec<ExplNode>,
    tree_node: Vec<usize>,
}

/// Attaches a ghost branching process with `levels` generations (root included) under `parent`.
fn grow_ghost<R: Rng + ?Sized>(
    tree: &mut Vec<ExplNode>,
    parent: usize,
    levels: usize,
    law: &Sampler,
    budget: usize,
    rng: &mut R,
) -> Result<()> {
    if levels == 0 {
        return Ok(());
    }
    let root_depth = tree[parent].depth + 1;
    let last_depth = root_depth + levels - 1;
    let mut frontier = vec![tree.len()];
    tree.push(ExplNode { parent: Some(parent), depth: root_depth, vertex: None });
    while let Some(node) = frontier.pop() {
        let d = tree[node].depth;
        if d >= last_depth {
            continue;
        }
        for _ in 0..law.sample(rng) {
            frontier.push(tree.len());
            tree.push(ExplNode { parent: Some(node), depth: d + 1, vertex: None });
            if tree.len() > budget {
                return Err(Error::Budget(format!("ghost subtree exceeded {budget} nodes")));
            }
        }
    }
    Ok(())
}

/// Every collision edge is a loop, a repeated edge, or joins depths differing by at most one.
pub fn surplus_edges_classified(out: &ExplorationOutput) -> bool {
    let mut seen = std::collections::HashSet::new();
    let local: std::collections::HashMap<usize, usize> =
        out.ball_vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    out.surplus_edges.iter().all(|&(u, v)| {
        let repeat = !seen.insert((u.min(v), u.max(v)));
        u == v || repeat || out.dist[local[&u]].abs_diff(out.dist[local[&v]]) <= 1
    })
}

/// `|E| − |V| + #components` of the ball of radius `r` around `v` (induced subgraph).
pub fn surplus_count(g: &MultiGraph, v: usize, r: usize) -> Result<usize> {
    if v >= g.n() {
        return Err(Error::VertexOutOfRange(v));
    }
    let mut keep = vec![false; g.n()];
    for (w, _) in g.ball(v, r) {
        keep[w] = true;
    }
    let (b, _) = g.induced_subgraph(&keep);
    Ok(b.edge_count() + b.component_count() - b.n())
}
