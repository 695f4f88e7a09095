use rand::Rng;
use rand_distr::Exp1;

use super::penalty::{PenaltySpec, RateTable};
use super::report::{EventCounts, EventKind, SurvivalReport, TraceEvent, NO_AUX};
use super::sumtree::SumTree;
use crate::error::{invalid, Result};
use crate::graph_core::{LazyTree, MultiGraph, NodeId};

/// A star whose infested periods should be recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct StarWatch {
    pub center: usize,
    pub leaves: Vec<usize>,
    /// Infested iff at least this many leaves are infected.
    pub threshold: usize,
}

#[derive(Debug, Clone)]
pub struct CpOptions {
    pub horizon: f64,
    /// Trees only: drop child → parent infections.
    pub down_directed: bool,
    pub track_local: bool,
    pub trace: bool,
    pub stars: Vec<StarWatch>,
    /// Infected sets are recorded at these times (sorted ascending).
    pub snapshot_times: Vec<f64>,
}

impl Default for CpOptions {
    fn default() -> Self {
        Self {
            horizon: 1_000.0,
            down_directed: false,
            track_local: false,
            trace: false,
            stars: Vec::new(),
            snapshot_times: Vec::new(),
        }
    }
}

impl CpOptions {
    pub fn with_horizon(horizon: f64) -> Self {
        Self { horizon, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct CpRun {
    pub report: SurvivalReport,
    pub trace: Vec<TraceEvent>,
    /// Sorted infected vertices at each requested snapshot time.
    pub snapshots: Vec<Vec<usize>>,
}

/// Where the process lives: rate lookup plus lazy activation.
pub(crate) trait Substrate {
    fn n(&self) -> usize;
    /// Prepares outgoing rates of `v`; `false` means `v` sits on an unexpandable boundary.
    fn activate(&mut self, v: usize) -> bool;
    fn total(&self, v: usize) -> f64;
    fn pick(&self, v: usize, x: f64) -> usize;
}

pub(crate) struct GraphSubstrate<'a>(pub &'a RateTable);

impl Substrate for GraphSubstrate<'_> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn activate(&mut self, _v: usize) -> bool {
        true
    }
    fn total(&self, v: usize) -> f64 {
        self.0.total(v)
    }
    fn pick(&self, v: usize, x: f64) -> usize {
        self.0.pick(v, x)
    }
}

struct LocalRates {
    targets: Vec<u32>,
    cum: Vec<f64>,
}

pub(crate) struct TreeSubstrate<'a> {
    pub tree: &'a mut LazyTree,
    penalty: PenaltySpec,
    down: bool,
    rates: Vec<Option<LocalRates>>,
}

impl<'a> TreeSubstrate<'a> {
    pub fn new(tree: &'a mut LazyTree, penalty: PenaltySpec, down: bool) -> Self {
        Self { tree, penalty, down, rates: Vec::new() }
    }
}

impl Substrate for TreeSubstrate<'_> {
    fn n(&self) -> usize {
        self.tree.len()
    }

    fn activate(&mut self, v: usize) -> bool {
        if self.rates.len() <= v {
            self.rates.resize_with(v + 1, || None);
        }
        if self.rates[v].is_some() {
            return true;
        }
        if self.tree.is_boundary(v) {
            return false;
        }
        let kids = self.tree.expand(v);
        let dv = self.tree.degree(v);
        let mut targets = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        let parent = if self.down { None } else { self.tree.parent(v) };
        for w in parent.into_iter().chain(kids) {
            acc += self.penalty.rate(1, dv, self.tree.degree(w));
            targets.push(w as u32);
            cum.push(acc);
        }
        self.rates[v] = Some(LocalRates { targets, cum });
        true
    }

    fn total(&self, v: usize) -> f64 {
        self.rates[v].as_ref().and_then(|r| r.cum.last().copied()).unwrap_or(0.0)
    }

    fn pick(&self, v: usize, x: f64) -> usize {
        let r = self.rates[v].as_ref().expect("activated");
        let i = r.cum.partition_point(|&a| a <= x).min(r.cum.len() - 1);
        r.targets[i] as usize
    }
}

/// Exact CP on a multigraph. Loops never matter for the CP and are ignored.
pub fn simulate_cp<R: Rng + ?Sized>(
    g: &MultiGraph,
    p: &PenaltySpec,
    xi0: &[usize],
    opts: &CpOptions,
    rng: &mut R,
) -> Result<CpRun> {
    if opts.down_directed {
        return Err(invalid("down-directed dynamics need a rooted tree substrate"));
    }
    let table = RateTable::build(g, p, false);
    simulate_cp_table(&table, xi0, opts, rng)
}

/// As [`simulate_cp`], reusing a prebuilt rate table across runs.
pub fn simulate_cp_table<R: Rng + ?Sized>(
    table: &RateTable,
    xi0: &[usize],
    opts: &CpOptions,
    rng: &mut R,
) -> Result<CpRun> {
    run_cp(&mut GraphSubstrate(table), xi0, opts, rng)
}

/// CP on a lazily grown tree; reaching the depth cap stops the run as escaped.
pub fn simulate_cp_tree<R: Rng + ?Sized>(
    tree: &mut LazyTree,
    p: &PenaltySpec,
    xi0: &[NodeId],
    opts: &CpOptions,
    rng: &mut R,
) -> Result<CpRun> {
    let mut sub = TreeSubstrate::new(tree, *p, opts.down_directed);
    run_cp(&mut sub, xi0, opts, rng)
}

struct StarTrack {
    leaf_of: Vec<u32>,
    count: Vec<usize>,
    open: Vec<Option<f64>>,
    intervals: Vec<Vec<(f64, f64)>>,
}

impl StarTrack {
    fn new(stars: &[StarWatch], n: usize) -> Self {
        let mut leaf_of = vec![u32::MAX; n];
        for (i, s) in stars.iter().enumerate() {
            for &l in &s.leaves {
                if l < n {
                    leaf_of[l] = i as u32;
                }
            }
        }
        Self {
            leaf_of,
            count: vec![0; stars.len()],
            open: vec![None; stars.len()],
            intervals: vec![Vec::new(); stars.len()],
        }
    }

    fn update(&mut self, stars: &[StarWatch], v: usize, delta: isize, t: f64) {
        let Some(&s) = self.leaf_of.get(v) else { return };
        if s == u32::MAX {
            return;
        }
        let s = s as usize;
        self.count[s] = (self.count[s] as isize + delta) as usize;
        let inf = self.count[s] >= stars[s].threshold;
        match (inf, self.open[s]) {
            (true, None) => self.open[s] = Some(t),
            (false, Some(a)) => {
                self.intervals[s].push((a, t));
                self.open[s] = None;
            }
            _ => {}
        }
    }

    fn close(&mut self, t: f64) {
        for (s, o) in self.open.iter_mut().enumerate() {
            if let Some(a) = o.take() {
                self.intervals[s].push((a, t));
            }
        }
    }
}

pub(crate) fn run_cp<S: Substrate, R: Rng + ?Sized>(
    sub: &mut S,
    xi0: &[usize],
    opts: &CpOptions,
    rng: &mut R,
) -> Result<CpRun> {
    if !(opts.horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    if xi0.is_empty() {
        return Err(invalid("initial infected set is empty"));
    }
    let mut n = sub.n();
    if let Some(&bad) = xi0.iter().find(|&&v| v >= n) {
        return Err(crate::error::Error::VertexOutOfRange(bad));
    }
    let mut infected = vec![false; n];
    let mut last_heal: Vec<Option<f64>> = if opts.track_local { vec![None; n] } else { Vec::new() };
    let mut tree = SumTree::new(n);
    let mut stars = StarTrack::new(&opts.stars, n);
    let mut trace = Vec::new();
    let mut snapshots = Vec::with_capacity(opts.snapshot_times.len());
    let mut next_snap = 0;
    let mut counts = EventCounts::default();
    let mut escaped = false;
    let mut n_inf = 0usize;

    for &v in xi0 {
        if infected[v] {
            continue;
        }
        if !sub.activate(v) {
            escaped = true;
        }
        infected[v] = true;
        n_inf += 1;
        tree.set(v, 1.0 + sub.total(v));
        stars.update(&opts.stars, v, 1, 0.0);
    }
    // Growth of a lazy substrate may add vertices after activation.
    let grow = |n: &mut usize,
                sub: &S,
                infected: &mut Vec<bool>,
                last: &mut Vec<Option<f64>>,
                tree: &mut SumTree,
                stars: &mut StarTrack,
                track: bool| {
        let m = sub.n();
        if m > *n {
            infected.resize(m, false);
            if track {
                last.resize(m, None);
            }
            stars.leaf_of.resize(m, u32::MAX);
            tree.ensure(m);
            *n = m;
        }
    };
    grow(&mut n, sub, &mut infected, &mut last_heal, &mut tree, &mut stars, opts.track_local);

    let snap = |infected: &[bool]| infected.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect::<Vec<_>>();
    let mut t = 0.0;
    let mut censored = false;
    while !escaped {
        let w = tree.total();
        if n_inf == 0 || w <= 0.0 {
            break;
        }
        let dt: f64 = rng.sample::<f64, _>(Exp1) / w;
        let t_next = t + dt;
        while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] < t_next.min(opts.horizon) {
            snapshots.push(snap(&infected));
            next_snap += 1;
        }
        if t_next > opts.horizon {
            censored = true;
            t = opts.horizon;
            break;
        }
        t = t_next;
        let v = tree.find(rng.random::<f64>() * w);
        let rv = sub.total(v);
        let u = rng.random::<f64>() * (1.0 + rv);
        if u < 1.0 {
            infected[v] = false;
            n_inf -= 1;
            tree.set(v, 0.0);
            counts.heals += 1;
            if opts.track_local {
                last_heal[v] = Some(t);
            }
            stars.update(&opts.stars, v, -1, t);
            if opts.trace {
                trace.push(TraceEvent { time: t, kind: EventKind::Heal, vertex: v as u32, aux: NO_AUX });
            }
        } else {
            let target = sub.pick(v, u - 1.0);
            if infected[target] {
                counts.blocked += 1;
                continue;
            }
            let inside = sub.activate(target);
            grow(&mut n, sub, &mut infected, &mut last_heal, &mut tree, &mut stars, opts.track_local);
            infected[target] = true;
            n_inf += 1;
            tree.set(target, 1.0 + sub.total(target));
            counts.infections += 1;
            stars.update(&opts.stars, target, 1, t);
            if opts.trace {
                trace.push(TraceEvent { time: t, kind: EventKind::Infect, vertex: target as u32, aux: v as u32 });
            }
            if !inside {
                escaped = true;
            }
        }
    }
    while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] <= opts.horizon {
        snapshots.push(snap(&infected));
        next_snap += 1;
    }
    stars.close(t);
    let local_ext = if opts.track_local {
        (0..n).map(|v| if infected[v] { None } else { last_heal[v] }).collect()
    } else {
        Vec::new()
    };
    let report = SurvivalReport {
        t_ext: t,
        censored,
        escaped,
        certified: false,
        local_ext,
        infestation_intervals: stars.intervals,
        events: counts,
    };
    Ok(CpRun { report, trace, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_sst, build_star};
    use crate::rng::rng_from_seed;
    use crate::stats::{harmonic, Running};

    #[test]
    fn pure_death_single_vertex_is_exp1() {
        let g = MultiGraph::from_edges(2, [(0, 1)]);
        let p = PenaltySpec::product(0.5, 0.0);
        let table = RateTable::build(&g, &p, false);
        let mut rng = rng_from_seed(11);
        let mut acc = Running::default();
        for _ in 0..100_000 {
            acc.push(simulate_cp_table(&table, &[0], &CpOptions::default(), &mut rng).unwrap().report.t_ext);
        }
        assert!((acc.mean() - 1.0).abs() < 3.0 * acc.se(), "mean {} se {}", acc.mean(), acc.se());
    }

    #[test]
    fn pure_death_many_vertices_is_harmonic() {
        let g = MultiGraph::empty(5);
        let p = PenaltySpec::product(0.5, 0.0);
        let table = RateTable::build(&g, &p, false);
        let mut rng = rng_from_seed(12);
        let mut acc = Running::default();
        for _ in 0..50_000 {
            acc.push(
                simulate_cp_table(&table, &[0, 1, 2, 3, 4], &CpOptions::default(), &mut rng).unwrap().report.t_ext,
            );
        }
        assert!((acc.mean() - harmonic(5)).abs() < 3.0 * acc.se());
    }

    #[test]
    fn errors_on_bad_input() {
        let g = build_star(3).unwrap();
        let p = PenaltySpec::max(0.5, 1.0);
        let mut rng = rng_from_seed(1);
        assert!(simulate_cp(&g, &p, &[], &CpOptions::default(), &mut rng).is_err());
        assert!(simulate_cp(&g, &p, &[0], &CpOptions::with_horizon(0.0), &mut rng).is_err());
        assert!(simulate_cp(&g, &p, &[9], &CpOptions::default(), &mut rng).is_err());
    }

    #[test]
    fn local_extinction_precedes_global() {
        let g = build_star(6).unwrap();
        let p = PenaltySpec::max(0.5, 1.5);
        let opts = CpOptions { track_local: true, trace: true, ..CpOptions::default() };
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let run = simulate_cp(&g, &p, &[0], &opts, &mut rng).unwrap();
            let r = &run.report;
            if !r.censored {
                assert!(r.local_ext.iter().flatten().all(|&x| x <= r.t_ext));
                assert_eq!(run.trace.last().map(|e| e.kind), Some(EventKind::Heal));
            }
        }
    }

    #[test]
    fn lazy_tree_escape_is_flagged() {
        let mut tree = build_sst(&[3], 2).unwrap();
        let p = PenaltySpec::product(0.0, 50.0);
        let run = simulate_cp_tree(&mut tree, &p, &[0], &CpOptions::default(), &mut rng_from_seed(4)).unwrap();
        assert!(run.report.escaped);
    }

    #[test]
    fn down_directed_never_infects_parent() {
        let mut tree = build_sst(&[2], 4).unwrap();
        let p = PenaltySpec::product(0.0, 5.0);
        let opts = CpOptions { down_directed: true, trace: true, ..CpOptions::default() };
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let run = simulate_cp_tree(&mut tree, &p, &[0], &opts, &mut rng).unwrap();
            for e in run.trace.iter().filter(|e| e.kind == EventKind::Infect) {
                assert_eq!(tree.parent(e.vertex as usize), Some(e.aux as usize));
            }
        }
    }

    #[test]
    fn infestation_intervals_are_ordered() {
        let g = build_star(10).unwrap();
        let p = PenaltySpec::max(0.25, 2.0);
        let watch = StarWatch { center: 0, leaves: (1..=10).collect(), threshold: 2 };
        let opts = CpOptions { stars: vec![watch], horizon: 50.0, ..CpOptions::default() };
        let run = simulate_cp(&g, &p, &[0], &opts, &mut rng_from_seed(8)).unwrap();
        let iv = &run.report.infestation_intervals[0];
        assert!(iv.iter().all(|&(a, b)| a <= b));
        assert!(iv.windows(2).all(|w| w[0].1 <= w[1].0));
    }
}
