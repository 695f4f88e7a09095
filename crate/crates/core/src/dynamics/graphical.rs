use rand::Rng;
use rand_distr::Exp1;

use super::penalty::PenaltySpec;
use super::report::{EventKind, TraceEvent, NO_AUX};
use crate::error::{invalid, Error, Result};
use crate::graph_core::MultiGraph;

/// Pre-sampled Poisson streams on `[0, T]`: rate-1 healing marks per vertex and
/// rate-`r(u,v)` infection arrows per directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicalRep {
    pub horizon: f64,
    n: usize,
    /// `(source, target, rate)` per directed edge with positive rate.
    arcs: Vec<(u32, u32, f64)>,
    pub heal: Vec<Vec<f64>>,
    pub infect: Vec<Vec<f64>>,
}

fn ppp<R: Rng + ?Sized>(rate: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        t += rng.sample::<f64, _>(Exp1) / rate;
        if t > horizon {
            return out;
        }
        out.push(t);
    }
}

pub fn build_graphical_rep<R: Rng + ?Sized>(
    g: &MultiGraph,
    p: &PenaltySpec,
    horizon: f64,
    rng: &mut R,
) -> Result<GraphicalRep> {
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    let n = g.n();
    let heal = (0..n).map(|_| ppp(1.0, horizon, rng)).collect();
    let mut arcs = Vec::new();
    for u in 0..n {
        for &(v, m) in g.neighbors(u) {
            let r = p.rate(m, g.degree(u), g.degree(v as usize));
            if r > 0.0 {
                arcs.push((u as u32, v, r));
            }
        }
    }
    let infect = arcs.iter().map(|a| ppp(a.2, horizon, rng)).collect();
    Ok(GraphicalRep { horizon, n, arcs, heal, infect })
}

#[derive(Debug, Clone, Copy)]
enum Mark {
    Heal(u32),
    Arrow(u32),
}

impl GraphicalRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.arcs.iter().map(|a| (a.0 as usize, a.1 as usize, a.2))
    }

    fn timeline(&self) -> Vec<(f64, Mark)> {
        let mut tl: Vec<(f64, Mark)> = Vec::new();
        for (v, hs) in self.heal.iter().enumerate() {
            tl.extend(hs.iter().map(|&t| (t, Mark::Heal(v as u32))));
        }
        for (a, ts) in self.infect.iter().enumerate() {
            tl.extend(ts.iter().map(|&t| (t, Mark::Arrow(a as u32))));
        }
        tl.sort_by(|x, y| x.0.total_cmp(&y.0));
        tl
    }
}

/// Deterministic replay: initial state plus the ordered list of state changes.
#[derive(Debug, Clone, PartialEq)]
pub struct RepTrace {
    pub initial: Vec<bool>,
    pub changes: Vec<TraceEvent>,
    pub horizon: f64,
}

impl RepTrace {
    /// Infected indicator vector at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> Vec<bool> {
        let mut s = self.initial.clone();
        for e in self.changes.iter().take_while(|e| e.time <= t) {
            s[e.vertex as usize] = e.kind == EventKind::Infect;
        }
        s
    }

    pub fn final_state(&self) -> Vec<bool> {
        self.state_at(f64::INFINITY)
    }

    pub fn extinction_time(&self) -> Option<f64> {
        if self.initial.iter().all(|x| !x) {
            return Some(0.0);
        }
        let fin = self.final_state();
        if fin.iter().any(|&x| x) {
            return None;
        }
        self.changes.last().map(|e| e.time)
    }
}

/// `ξ_t(u) = 1` iff an infection path reaches `(u, t)` from `ξ₀ × {0}`.
pub fn run_cp_from_rep(rep: &GraphicalRep, xi0: &[usize]) -> Result<RepTrace> {
    let mut state = vec![false; rep.n];
    for &v in xi0 {
        if v >= rep.n {
            return Err(Error::VertexOutOfRange(v));
        }
        state[v] = true;
    }
    let initial = state.clone();
    let mut changes = Vec::new();
    for (t, m) in rep.timeline() {
        match m {
            Mark::Heal(v) => {
                if state[v as usize] {
                    state[v as usize] = false;
                    changes.push(TraceEvent { time: t, kind: EventKind::Heal, vertex: v, aux: NO_AUX });
                }
            }
            Mark::Arrow(a) => {
                let (s, d, _) = rep.arcs[a as usize];
                if state[s as usize] && !state[d as usize] {
                    state[d as usize] = true;
                    changes.push(TraceEvent { time: t, kind: EventKind::Infect, vertex: d, aux: s });
                }
            }
        }
    }
    Ok(RepTrace { initial, changes, horizon: rep.horizon })
}

/// Counts event times at which `inner ⊄ outer`; zero means nested throughout.
pub fn nesting_violations(inner: &RepTrace, outer: &RepTrace) -> usize {
    let n = inner.initial.len();
    let mut a = inner.initial.clone();
    let mut b = outer.initial.clone();
    let mut bad: usize = (0..n).filter(|&v| a[v] && !b[v]).count();
    let mut violations = usize::from(bad > 0);
    let (mut i, mut j) = (0, 0);
    let apply = |s: &mut Vec<bool>, e: &TraceEvent, other: &[bool], bad: &mut usize, inner_side: bool| {
        let v = e.vertex as usize;
        let before = if inner_side { s[v] && !other[v] } else { other[v] && !s[v] };
        s[v] = e.kind == EventKind::Infect;
        let after = if inner_side { s[v] && !other[v] } else { other[v] && !s[v] };
        *bad = *bad + usize::from(after) - usize::from(before);
    };
    while i < inner.changes.len() || j < outer.changes.len() {
        let ti = inner.changes.get(i).map_or(f64::INFINITY, |e| e.time);
        let tj = outer.changes.get(j).map_or(f64::INFINITY, |e| e.time);
        let t = ti.min(tj);
        while i < inner.changes.len() && inner.changes[i].time == t {
            apply(&mut a, &inner.changes[i], &b, &mut bad, true);
            i += 1;
        }
        while j < outer.changes.len() && outer.changes[j].time == t {
            apply(&mut b, &outer.changes[j], &a, &mut bad, false);
            j += 1;
        }
        if bad > 0 {
            violations += 1;
        }
    }
    violations
}

/// Keeps each infection arrow independently with probability `keep(u, v)`.
pub fn thin_rep_with<R: Rng + ?Sized>(
    rep: &GraphicalRep,
    keep: impl Fn(usize, usize) -> f64,
    rng: &mut R,
) -> Result<GraphicalRep> {
    let mut out = rep.clone();
    for (a, ts) in out.infect.iter_mut().enumerate() {
        let (s, d, r) = rep.arcs[a];
        let q = keep(s as usize, d as usize);
        if !(0.0..=1.0 + 1e-12).contains(&q) {
            return Err(Error::NotDominating(s as usize, d as usize, q));
        }
        ts.retain(|_| rng.random::<f64>() < q);
        out.arcs[a].2 = r * q.min(1.0);
    }
    Ok(out)
}

/// Representation for penalty `to` obtained from one for `from` (on the same graph)
/// by thinning with `r_to/r_from`. Requires `f_to ≥ f_from` on every edge.
pub fn thin_rep<R: Rng + ?Sized>(
    rep: &GraphicalRep,
    g: &MultiGraph,
    from: &PenaltySpec,
    to: &PenaltySpec,
    rng: &mut R,
) -> Result<GraphicalRep> {
    let ratio = |u: usize, v: usize| {
        let m = g.multiplicity(u, v);
        to.rate(m, g.degree(u), g.degree(v)) / from.rate(m, g.degree(u), g.degree(v))
    };
    thin_rep_with(rep, ratio, rng)
}
