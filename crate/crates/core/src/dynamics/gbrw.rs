use std::collections::HashMap;

use rand::Rng;
use rand_distr::Exp1;

use super::brw::DEFAULT_CAP;
use super::penalty::{PenaltySpec, RateTable};
use super::sumtree::SumTree;
use crate::error::{invalid, Error, Result};
use crate::graph_core::MultiGraph;
use crate::rng::rng_from_seed;

pub type LabelId = u32;

const ROOT_PARENT: u32 = u32::MAX;
const OVERFLOW_PARENT: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy)]
struct LabelNode {
    parent: u32,
    vertex: u32,
    len: u32,
}

/// Genealogical labels as a trie of vertex sequences. Labels longer than the cap
/// are pooled into one overflow label per end vertex.
#[derive(Debug, Clone, Default)]
pub struct LabelTrie {
    nodes: Vec<LabelNode>,
    index: HashMap<(u32, u32), u32>,
    overflow: HashMap<u32, u32>,
}

impl LabelTrie {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length-0 label `(v)`.
    pub fn root(&mut self, v: usize) -> LabelId {
        self.child_raw(ROOT_PARENT, v as u32, 0)
    }

    fn child_raw(&mut self, parent: u32, vertex: u32, len: u32) -> LabelId {
        let next = self.nodes.len() as u32;
        *self.index.entry((parent, vertex)).or_insert_with(|| {
            self.nodes.push(LabelNode { parent, vertex, len });
            next
        })
    }

    fn overflow_label(&mut self, v: u32) -> LabelId {
        let next = self.nodes.len() as u32;
        *self.overflow.entry(v).or_insert_with(|| {
            self.nodes.push(LabelNode { parent: OVERFLOW_PARENT, vertex: v, len: u32::MAX });
            next
        })
    }

    /// Label `(π, v)`, or the overflow label at `v` beyond `cap`.
    pub fn extend(&mut self, l: LabelId, v: usize, cap: usize) -> LabelId {
        let node = self.nodes[l as usize];
        if node.parent == OVERFLOW_PARENT || node.len as usize >= cap {
            self.overflow_label(v as u32)
        } else {
            self.child_raw(l, v as u32, node.len + 1)
        }
    }

    /// Looks up an exact label without inserting.
    pub fn find(&self, path: &[usize]) -> Option<LabelId> {
        let mut cur = ROOT_PARENT;
        for &v in path {
            cur = *self.index.get(&(cur, v as u32))?;
        }
        (!path.is_empty()).then_some(cur)
    }

    pub fn is_overflow(&self, l: LabelId) -> bool {
        self.nodes[l as usize].parent == OVERFLOW_PARENT
    }

    pub fn end(&self, l: LabelId) -> usize {
        self.nodes[l as usize].vertex as usize
    }

    /// Vertex sequence of a label; `None` for overflow labels.
    pub fn path(&self, l: LabelId) -> Option<Vec<usize>> {
        if self.is_overflow(l) {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = l;
        while cur != ROOT_PARENT {
            let n = self.nodes[cur as usize];
            out.push(n.vertex as usize);
            cur = n.parent;
        }
        out.reverse();
        Some(out)
    }
}

#[derive(Debug, Clone)]
pub struct GbrwOptions {
    pub horizon: f64,
    pub path_len_cap: usize,
    pub cap: u64,
    pub snapshot_times: Vec<f64>,
    /// Seed of the stream that picks which particle at a vertex acts. The vertex-level
    /// dynamics consume the main stream exactly as [`super::simulate_brw`] does.
    pub label_seed: u64,
}

impl Default for GbrwOptions {
    fn default() -> Self {
        Self { horizon: 1_000.0, path_len_cap: 4, cap: DEFAULT_CAP, snapshot_times: Vec::new(), label_seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct GbrwRun {
    /// `Z(π)`: particles ever born with label id `π` (initial particles included).
    pub z: Vec<u64>,
    /// Sparse `y_t(π)` at each snapshot time.
    pub label_snapshots: Vec<Vec<(LabelId, u64)>>,
    /// Projected counts `x_t(v)` at each snapshot time.
    pub vertex_snapshots: Vec<Vec<u64>>,
    pub t_end: f64,
    pub extinct: bool,
    pub certified: bool,
}

/// Genealogic BRW. Label ids refer to `trie`, which can be shared across runs.
pub fn simulate_gbrw<R: Rng + ?Sized>(
    g: &MultiGraph,
    p: &PenaltySpec,
    x0: &[u64],
    opts: &GbrwOptions,
    trie: &mut LabelTrie,
    rng: &mut R,
) -> Result<GbrwRun> {
    let table = RateTable::build(g, p, true);
    simulate_gbrw_table(&table, x0, opts, trie, rng)
}

pub fn simulate_gbrw_table<R: Rng + ?Sized>(
    table: &RateTable,
    x0: &[u64],
    opts: &GbrwOptions,
    trie: &mut LabelTrie,
    rng: &mut R,
) -> Result<GbrwRun> {
    let n = table.n();
    if x0.len() != n {
        return Err(Error::InvalidInput(format!("x0 has length {} for {} vertices", x0.len(), n)));
    }
    if opts.cap == 0 || !(opts.horizon > 0.0) {
        return Err(invalid("need a positive cap and horizon"));
    }
    let mut label_rng = rng_from_seed(opts.label_seed);
    let mut at: Vec<Vec<LabelId>> = vec![Vec::new(); n];
    let mut z: Vec<u64> = vec![0; trie.len()];
    let mut y: Vec<u64> = vec![0; trie.len()];
    let bump = |v: &mut Vec<u64>, l: LabelId, d: i64| {
        if v.len() <= l as usize {
            v.resize(l as usize + 1, 0);
        }
        v[l as usize] = (v[l as usize] as i64 + d) as u64;
    };
    let mut tree = SumTree::new(n);
    let mut total = 0u64;
    for v in 0..n {
        if x0[v] > 0 {
            let l = trie.root(v);
            at[v].extend(std::iter::repeat_n(l, x0[v] as usize));
            bump(&mut z, l, x0[v] as i64);
            bump(&mut y, l, x0[v] as i64);
            total += x0[v];
        }
        tree.set(v, x0[v] as f64 * (1.0 + table.total(v)));
    }
    let snap_labels =
        |y: &[u64]| y.iter().enumerate().filter(|p| *p.1 > 0).map(|(l, &c)| (l as LabelId, c)).collect::<Vec<_>>();
    let snap_vertices = |at: &[Vec<LabelId>]| at.iter().map(|a| a.len() as u64).collect::<Vec<_>>();
    let mut label_snapshots = Vec::new();
    let mut vertex_snapshots = Vec::new();
    let mut next_snap = 0;
    let mut t = 0.0;
    let mut certified = false;
    while total > 0 {
        if total >= opts.cap {
            certified = true;
            break;
        }
        let w = tree.total();
        let t_next = t + rng.sample::<f64, _>(Exp1) / w;
        while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] < t_next.min(opts.horizon) {
            label_snapshots.push(snap_labels(&y));
            vertex_snapshots.push(snap_vertices(&at));
            next_snap += 1;
        }
        if t_next > opts.horizon {
            t = opts.horizon;
            break;
        }
        t = t_next;
        let v = tree.find(rng.random::<f64>() * w);
        let rv = table.total(v);
        let u = rng.random::<f64>() * (1.0 + rv);
        let i = label_rng.random_range(0..at[v].len());
        if u < 1.0 {
            let l = at[v].swap_remove(i);
            bump(&mut y, l, -1);
            total -= 1;
            tree.set(v, at[v].len() as f64 * (1.0 + rv));
        } else {
            let target = table.pick(v, u - 1.0);
            let child = trie.extend(at[v][i], target, opts.path_len_cap);
            at[target].push(child);
            bump(&mut z, child, 1);
            bump(&mut y, child, 1);
            total += 1;
            tree.set(target, at[target].len() as f64 * (1.0 + table.total(target)));
        }
    }
    while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] <= opts.horizon {
        label_snapshots.push(snap_labels(&y));
        vertex_snapshots.push(snap_vertices(&at));
        next_snap += 1;
    }
    z.resize(trie.len(), 0);
    Ok(GbrwRun { z, label_snapshots, vertex_snapshots, t_end: t, extinct: total == 0, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::brw::{simulate_brw, BrwOptions};
    use crate::rng::rng_from_seed;
    use crate::stats::Running;

    #[test]
    fn trie_paths_and_overflow() {
        let mut t = LabelTrie::new();
        let a = t.root(0);
        let b = t.extend(a, 1, 2);
        let c = t.extend(b, 2, 2);
        let d = t.extend(c, 1, 2);
        assert_eq!(t.path(c), Some(vec![0, 1, 2]));
        assert!(t.is_overflow(d));
        assert_eq!(t.end(d), 1);
        assert_eq!(t.extend(d, 0, 2), t.extend(d, 0, 2));
        assert_eq!(t.find(&[0, 1]), Some(b));
        assert_eq!(t.find(&[1, 0]), None);
    }

    #[test]
    fn initial_label_counts_x0() {
        let g = MultiGraph::from_edges(2, [(0, 1)]);
        let p = PenaltySpec::max(1.0, 0.5);
        let mut trie = LabelTrie::new();
        let run = simulate_gbrw(&g, &p, &[3, 0], &GbrwOptions::default(), &mut trie, &mut rng_from_seed(1)).unwrap();
        assert_eq!(run.z[trie.find(&[0]).unwrap() as usize], 3);
    }

    #[test]
    fn projection_matches_plain_brw_pathwise() {
        let g = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (2, 2)]);
        let p = PenaltySpec::max(0.5, 0.9);
        let times = vec![0.3, 0.7, 1.5, 3.0];
        for seed in 0..200 {
            let mut trie = LabelTrie::new();
            let gopts = GbrwOptions {
                snapshot_times: times.clone(),
                path_len_cap: 2,
                label_seed: seed + 99,
                ..GbrwOptions::default()
            };
            let gr = simulate_gbrw(&g, &p, &[1, 0, 2, 0], &gopts, &mut trie, &mut rng_from_seed(seed)).unwrap();
            let bopts = BrwOptions { snapshot_times: times.clone(), ..BrwOptions::default() };
            let br = simulate_brw(&g, &p, &[1, 0, 2, 0], &bopts, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(gr.vertex_snapshots, br.snapshots);
            for (ls, xs) in gr.label_snapshots.iter().zip(&gr.vertex_snapshots) {
                let mut proj = vec![0u64; 4];
                for &(l, c) in ls {
                    proj[trie.end(l)] += c;
                }
                assert_eq!(&proj, xs);
            }
        }
    }

    #[test]
    fn expected_births_on_an_edge() {
        let g = MultiGraph::from_edges(2, [(0, 1)]);
        let p = PenaltySpec::max(1.0, 0.5);
        let mut trie = LabelTrie::new();
        let ab = {
            let a = trie.root(0);
            trie.extend(a, 1, 3)
        };
        let opts = GbrwOptions { path_len_cap: 3, ..GbrwOptions::default() };
        let mut rng = rng_from_seed(17);
        let mut acc = Running::default();
        for _ in 0..100_000 {
            let run = simulate_gbrw(&g, &p, &[1, 0], &opts, &mut trie, &mut rng).unwrap();
            acc.push(run.z.get(ab as usize).copied().unwrap_or(0) as f64);
        }
        let want = 0.5;
        assert!((acc.mean() - want).abs() < 3.0 * acc.se(), "{} vs {want}", acc.mean());
    }
}
