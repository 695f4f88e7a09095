use std::collections::{HashSet, VecDeque};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, out_of_range, Result};
use crate::rng::substream;
use crate::stats::proportion;

/// How the two out-edges of one site are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Dependence {
    Independent,
    /// One uniform per site opens both out-edges together.
    #[default]
    SharedSource,
}

/// Oriented percolation on the cone `{(x, y) : x, y ≥ 1, x + y even}` with edges
/// `(x, y) → (x ± 1, y + 1)`, each open with probability `1 − δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeConfig {
    pub delta: f64,
    pub depth: usize,
    pub mode: Dependence,
}

impl ConeConfig {
    pub fn new(delta: f64, depth: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(out_of_range(format!("δ = {delta} outside [0, 1]")));
        }
        if depth == 0 {
            return Err(invalid("cone depth must be at least 1"));
        }
        Ok(Self { delta, depth, mode: Dependence::SharedSource })
    }

    pub fn with_mode(mut self, mode: Dependence) -> Self {
        self.mode = mode;
        self
    }
}

/// Sites of layer `y` are `x = 1 + (y+1)%2, …, y` in steps of 2; index `i = (x−1)/2`.
fn layer_len(y: usize) -> usize {
    y.div_ceil(2)
}

fn x_of(y: usize, i: usize) -> usize {
    2 * i + if y % 2 == 1 { 1 } else { 2 }
}

fn index_of(x: usize, y: usize) -> Option<usize> {
    (x >= 1 && x <= y && (x + y).is_multiple_of(2)).then_some((x - 1) / 2)
}

/// Open/closed state of every edge leaving layers `1..depth`.
#[derive(Debug, Clone)]
pub struct EdgeField {
    depth: usize,
    /// `open[y-1][i] = [left, right]`.
    open: Vec<Vec<[bool; 2]>>,
}

fn draw_layer<R: Rng + ?Sized>(y: usize, delta: f64, mode: Dependence, rng: &mut R) -> Vec<[bool; 2]> {
    let p_open = 1.0 - delta;
    (0..layer_len(y))
        .map(|i| {
            let (ul, ur) = match mode {
                Dependence::Independent => (rng.random::<f64>(), rng.random::<f64>()),
                Dependence::SharedSource => {
                    let u = rng.random::<f64>();
                    (u, u)
                }
            };
            // x = 1 has no left neighbour in the cone.
            [x_of(y, i) > 1 && ul < p_open, ur < p_open]
        })
        .collect()
}

impl EdgeField {
    pub fn sample<R: Rng + ?Sized>(cfg: &ConeConfig, rng: &mut R) -> Self {
        let open = (1..cfg.depth).map(|y| draw_layer(y, cfg.delta, cfg.mode, rng)).collect();
        Self { depth: cfg.depth, open }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Whether `(x, y) → (x + dx, y + 1)` is open, `dx = ±1`.
    pub fn is_open(&self, x: usize, y: usize, dx: i8) -> bool {
        if y == 0 || y >= self.depth {
            return false;
        }
        match index_of(x, y) {
            Some(i) => self.open[y - 1][i][usize::from(dx > 0)],
            None => false,
        }
    }

    /// Opens every edge whose state is open in `self` or in `other`.
    pub fn union(&self, other: &EdgeField) -> EdgeField {
        let open = self
            .open
            .iter()
            .zip(&other.open)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| [p[0] || q[0], p[1] || q[1]]).collect())
            .collect();
        EdgeField { depth: self.depth.min(other.depth), open }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum YMax {
    Finite(usize),
    /// `(1, y)` is in the cluster for the last odd `y ≤ depth`.
    AtLeast(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterResult {
    pub depth: usize,
    /// `eta[y-1][i]` for the site `(x_of(y, i), y)`.
    pub eta: Vec<Vec<bool>>,
    pub y_max: YMax,
    pub size: usize,
}

impl ClusterResult {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        y >= 1 && y <= self.depth && index_of(x, y).is_some_and(|i| self.eta[y - 1][i])
    }

    /// Cluster sites as `(x, y)`, sorted by layer then `x`.
    pub fn sites(&self) -> Vec<(usize, usize)> {
        self.eta
            .iter()
            .enumerate()
            .flat_map(|(l, row)| row.iter().enumerate().filter(|e| *e.1).map(move |(i, _)| (x_of(l + 1, i), l + 1)))
            .collect()
    }

    /// Highest layer containing a cluster site.
    pub fn height(&self) -> usize {
        self.eta.iter().rposition(|row| row.iter().any(|&b| b)).map_or(0, |l| l + 1)
    }

    pub fn survives(&self) -> bool {
        matches!(self.y_max, YMax::AtLeast(_))
    }
}

fn next_layer(prev: &[bool], y: usize, edges: &[[bool; 2]]) -> Vec<bool> {
    (0..layer_len(y + 1))
        .map(|i| {
            let x = x_of(y + 1, i);
            let from_left = x >= 2 && index_of(x - 1, y).is_some_and(|j| prev[j] && edges[j][1]);
            let from_right = index_of(x + 1, y).is_some_and(|j| prev[j] && edges[j][0]);
            from_left || from_right
        })
        .collect()
}

fn y_max_of(first_column: impl Fn(usize) -> bool, depth: usize) -> YMax {
    let top = if depth % 2 == 1 { depth } else { depth - 1 };
    let best = (1..=top).step_by(2).filter(|&y| first_column(y)).max().unwrap_or(1);
    if best == top {
        YMax::AtLeast(depth)
    } else {
        YMax::Finite(best)
    }
}

/// Layer-by-layer evaluation of `η((x,1)) = 1{x=1}` and
/// `η((x,y+1)) = η(x−1,y)·A_{(x−1,y)→(x,y+1)} ∨ η(x+1,y)·A_{(x+1,y)→(x,y+1)}`.
pub fn cluster_from_field(field: &EdgeField) -> ClusterResult {
    let mut eta = vec![vec![true]];
    for y in 1..field.depth {
        let next = next_layer(&eta[y - 1], y, &field.open[y - 1]);
        eta.push(next);
    }
    let size = eta.iter().flatten().filter(|&&b| b).count();
    let y_max = y_max_of(|y| eta[y - 1][0], field.depth);
    ClusterResult { depth: field.depth, eta, y_max, size }
}

/// Sites reachable from `(1, 1)` along open oriented edges, by breadth-first search.
pub fn reachable_from_field(field: &EdgeField) -> Vec<(usize, usize)> {
    let mut seen = HashSet::from([(1usize, 1usize)]);
    let mut queue = VecDeque::from([(1usize, 1usize)]);
    while let Some((x, y)) = queue.pop_front() {
        for dx in [-1i8, 1] {
            if field.is_open(x, y, dx) {
                let nx = if dx < 0 { x - 1 } else { x + 1 };
                if seen.insert((nx, y + 1)) {
                    queue.push_back((nx, y + 1));
                }
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_by_key(|&(x, y)| (y, x));
    out
}

pub fn op_cluster<R: Rng + ?Sized>(cfg: &ConeConfig, rng: &mut R) -> ClusterResult {
    cluster_from_field(&EdgeField::sample(cfg, rng))
}

/// Same random stream as [`op_cluster`] but keeps only the current layer and the
/// first column.
pub fn cluster_survives<R: Rng + ?Sized>(cfg: &ConeConfig, rng: &mut R) -> bool {
    let mut layer = vec![true];
    let mut column = vec![true];
    for y in 1..cfg.depth {
        let edges = draw_layer(y, cfg.delta, cfg.mode, rng);
        layer = next_layer(&layer, y, &edges);
        if (y + 1) % 2 == 1 {
            column.push(layer[0]);
        }
    }
    matches!(y_max_of(|y| column[y / 2], cfg.depth), YMax::AtLeast(_))
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalEstimate {
    pub delta: f64,
    pub depth: usize,
    pub reps: usize,
    pub survival: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Monte Carlo `P(Y_max ≥ depth)`. Replica `i` uses the stream `(seed, i)` whatever
/// `δ` is, so estimates at different `δ` share random numbers and are monotone.
pub fn survival_estimate(cfg: &ConeConfig, reps: usize, seed: u64) -> Result<SurvivalEstimate> {
    if reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let hits = (0..reps).into_par_iter().filter(|&i| cluster_survives(cfg, &mut substream(seed, &[i as u64]))).count();
    let (p, se) = proportion(hits, reps);
    Ok(SurvivalEstimate {
        delta: cfg.delta,
        depth: cfg.depth,
        reps,
        survival: p,
        se,
        ci_lo: (p - 1.96 * se).max(0.0),
        ci_hi: (p + 1.96 * se).min(1.0),
    })
}

pub fn write_survival_csv<W: Write>(rows: &[SurvivalEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "depth", "survival", "ci_lo", "ci_hi"])?;
    for r in rows {
        w.write_record([
            r.delta.to_string(),
            r.depth.to_string(),
            r.survival.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `Σ_{k≥1} 3^k δ^{k/4} = q/(1−q)` with `q = 3δ^{1/4}`; errors when `q ≥ 1`.
pub fn peierls_bound(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(out_of_range(format!("δ = {delta} outside [0, 1]")));
    }
    let q = 3.0 * delta.sqrt().sqrt();
    if q >= 1.0 {
        return Err(out_of_range(format!("Peierls sum diverges: 3δ^(1/4) = {q} ≥ 1")));
    }
    Ok(q / (1.0 - q))
}

/// `Σ_{k=1}^{terms} 3^k δ^{k/4}`.
pub fn peierls_partial(delta: f64, terms: usize) -> f64 {
    let q = 3.0 * delta.sqrt().sqrt();
    (1..=terms as i32).map(|k| q.powi(k)).sum()
}

/// Boundary walk of a finite cluster on the dual lattice `{x + y odd}`.
#[derive(Debug, Clone, Serialize)]
pub struct ContourReport {
    pub start: (usize, usize),
    /// Dual vertices visited, starting at `(1, Y_max + 1)`.
    pub path: Vec<(usize, usize)>,
    pub steps: usize,
    pub right_steps: usize,
    pub outward_steps: usize,
    /// Every step to the right crossed an outward edge and vice versa.
    pub right_iff_outward: bool,
    /// Every outward edge crossed was closed.
    pub outward_closed: bool,
    /// In every prefix of length `j`, at least `j/2` steps went right.
    pub half_right: bool,
    /// Distinct sources among outward edges in the first `Y_max` steps.
    pub distinct_closed_sources: usize,
    pub reached_x_axis: bool,
}

type Site = (usize, usize);

/// The four primal edges around dual vertex `(p, q)`, each as `(source, target, neighbour)`.
fn face_edges(p: usize, q: usize) -> Vec<(Site, Site, Site)> {
    let mut out = Vec::with_capacity(4);
    let (b, l, r, t) = ((p, q.wrapping_sub(1)), (p.wrapping_sub(1), q), (p + 1, q), (p, q + 1));
    let valid = |s: Site| s.0 >= 1 && s.1 >= 1 && s.0 != usize::MAX && s.1 != usize::MAX;
    if valid(b) && valid(l) {
        out.push((b, l, (p - 1, q - 1)));
    }
    if valid(b) {
        out.push((b, r, (p + 1, q - 1)));
    }
    if valid(l) {
        out.push((l, t, (p - 1, q + 1)));
    }
    out.push((r, t, (p + 1, q + 1)));
    out
}

/// Traces the dual boundary of a finite cluster from `(1, Y_max + 1)`. Returns `None`
/// if the cluster touches the top layer, where edge states are unknown.
pub fn contour_census(cluster: &ClusterResult, field: &EdgeField) -> Option<ContourReport> {
    let k = match cluster.y_max {
        YMax::Finite(k) => k,
        YMax::AtLeast(_) => return None,
    };
    if cluster.height() + 1 >= cluster.depth {
        return None;
    }
    let inside = |s: Site| cluster.contains(s.0, s.1);
    let boundary = |d: Site| -> Vec<(Site, Site, Site)> {
        face_edges(d.0, d.1).into_iter().filter(|&(a, b, _)| inside(a) != inside(b)).collect()
    };
    let start = (1, k + 1);
    let mut path = vec![start];
    let mut prev: Option<(Site, Site)> = None;
    let mut cur = start;
    let (mut right, mut outward, mut iff, mut closed, mut half) = (0, 0, true, true, true);
    let mut sources = HashSet::new();
    let limit = 4 * cluster.depth * cluster.depth;
    loop {
        let cands: Vec<_> = boundary(cur).into_iter().filter(|&(a, b, _)| Some((a, b)) != prev).collect();
        let pick = match cands.len() {
            0 => break,
            1 => cands[0],
            _ => {
                // Saddle face: turn around the cluster site of the incoming edge.
                let pivot = prev.map(|(a, b)| if inside(a) { a } else { b });
                *cands.iter().find(|&&(a, b, _)| Some(a) == pivot || Some(b) == pivot).unwrap_or(&cands[0])
            }
        };
        let (src, dst, next) = pick;
        let step_right = next.0 > cur.0;
        let is_out = inside(src) && !inside(dst);
        let steps = path.len();
        right += usize::from(step_right);
        if is_out {
            outward += 1;
            let dx = if dst.0 > src.0 { 1 } else { -1 };
            closed &= !field.is_open(src.0, src.1, dx);
            if steps <= k {
                sources.insert(src);
            }
        }
        iff &= step_right == is_out;
        half &= 2 * right >= steps;
        prev = Some((src, dst));
        cur = next;
        path.push(cur);
        if cur.1 == 1 || path.len() > limit {
            break;
        }
    }
    let steps = path.len() - 1;
    Some(ContourReport {
        start,
        reached_x_axis: cur.1 == 1,
        path,
        steps,
        right_steps: right,
        outward_steps: outward,
        right_iff_outward: iff,
        outward_closed: closed,
        half_right: half,
        distinct_closed_sources: sources.len(),
    })
}
