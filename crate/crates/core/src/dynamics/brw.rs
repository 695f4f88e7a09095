use rand::Rng;
use rand_distr::Exp1;

use super::penalty::{PenaltySpec, RateTable};
use super::report::{EventCounts, EventKind, SurvivalReport, TraceEvent, NO_AUX};
use super::sumtree::SumTree;
use crate::error::{invalid, Error, Result};
use crate::graph_core::MultiGraph;

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct BrwOptions {
    pub horizon: f64,
    /// Total-particle cap; reaching it ends the run as "survival certified".
    pub cap: u64,
    pub trace: bool,
    /// Particle counts per vertex are recorded at these times (sorted ascending).
    pub snapshot_times: Vec<f64>,
}

impl Default for BrwOptions {
    fn default() -> Self {
        Self { horizon: 1_000.0, cap: DEFAULT_CAP, trace: false, snapshot_times: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct BrwRun {
    pub report: SurvivalReport,
    pub trace: Vec<TraceEvent>,
    pub snapshots: Vec<Vec<u64>>,
    pub max_particles: u64,
}

/// Exact BRW: each particle dies at rate 1 and gives birth onto each neighbour `u`
/// (itself along loops) at rate `r(v,u)`.
pub fn simulate_brw<R: Rng + ?Sized>(
    g: &MultiGraph,
    p: &PenaltySpec,
    x0: &[u64],
    opts: &BrwOptions,
    rng: &mut R,
) -> Result<BrwRun> {
    let table = RateTable::build(g, p, true);
    simulate_brw_table(&table, x0, opts, rng)
}

pub fn simulate_brw_table<R: Rng + ?Sized>(
    table: &RateTable,
    x0: &[u64],
    opts: &BrwOptions,
    rng: &mut R,
) -> Result<BrwRun> {
    if opts.cap == 0 {
        return Err(invalid("particle cap must be positive"));
    }
    if !(opts.horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    let n = table.n();
    if x0.len() != n {
        return Err(Error::InvalidInput(format!("x0 has length {} for {} vertices", x0.len(), n)));
    }
    let mut x = x0.to_vec();
    let mut total: u64 = x.iter().sum();
    let mut tree = SumTree::new(n);
    for (v, &c) in x.iter().enumerate() {
        tree.set(v, c as f64 * (1.0 + table.total(v)));
    }
    let mut t = 0.0;
    let mut counts = EventCounts::default();
    let mut trace = Vec::new();
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    let mut censored = false;
    let mut certified = false;
    let mut max_particles = total;
    while total > 0 {
        if total >= opts.cap {
            certified = true;
            break;
        }
        let w = tree.total();
        let t_next = t + rng.sample::<f64, _>(Exp1) / w;
        while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] < t_next.min(opts.horizon) {
            snapshots.push(x.clone());
            next_snap += 1;
        }
        if t_next > opts.horizon {
            censored = true;
            t = opts.horizon;
            break;
        }
        t = t_next;
        let v = tree.find(rng.random::<f64>() * w);
        let rv = table.total(v);
        let u = rng.random::<f64>() * (1.0 + rv);
        if u < 1.0 {
            x[v] -= 1;
            total -= 1;
            tree.set(v, x[v] as f64 * (1.0 + rv));
            counts.heals += 1;
            if opts.trace {
                trace.push(TraceEvent { time: t, kind: EventKind::Death, vertex: v as u32, aux: NO_AUX });
            }
        } else {
            let target = table.pick(v, u - 1.0);
            x[target] += 1;
            total += 1;
            max_particles = max_particles.max(total);
            tree.set(target, x[target] as f64 * (1.0 + table.total(target)));
            counts.infections += 1;
            if opts.trace {
                trace.push(TraceEvent { time: t, kind: EventKind::Birth, vertex: target as u32, aux: v as u32 });
            }
        }
    }
    while next_snap < opts.snapshot_times.len() && opts.snapshot_times[next_snap] <= opts.horizon {
        snapshots.push(x.clone());
        next_snap += 1;
    }
    let report = SurvivalReport {
        t_ext: t,
        censored,
        escaped: false,
        certified,
        local_ext: Vec::new(),
        infestation_intervals: Vec::new(),
        events: counts,
    };
    Ok(BrwRun { report, trace, snapshots, max_particles })
}

/// Joint CP/BRW sample on one probability space.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub cp_snapshots: Vec<Vec<bool>>,
    pub brw_snapshots: Vec<Vec<u64>>,
    /// Event times at which `ξ_t(v) = 1` but `x_t(v) = 0` for some `v`.
    pub violations: usize,
    pub events: u64,
    pub cp_extinction: Option<f64>,
    pub brw_extinction: Option<f64>,
}

/// CP and BRW coupled through a token particle.
///
/// Every CP-infected vertex carries one distinguished BRW particle (its token).
/// A token's death heals its vertex; a token's birth onto a vertex without a token
/// infects it and the newborn becomes that vertex's token. Non-token particles follow
/// the BRW alone. Both marginals are exact and `ξ_t ≤ 1{x_t > 0}` holds pathwise;
/// the invariant is re-checked after every event.
pub fn simulate_coupled_cp_brw<R: Rng + ?Sized>(
    g: &MultiGraph,
    p: &PenaltySpec,
    xi0: &[usize],
    horizon: f64,
    snapshot_times: &[f64],
    cap: u64,
    rng: &mut R,
) -> Result<CoupledRun> {
    if xi0.is_empty() {
        return Err(invalid("initial infected set is empty"));
    }
    let table = RateTable::build(g, p, true);
    let n = g.n();
    let mut x = vec![0u64; n];
    let mut token = vec![false; n];
    for &v in xi0 {
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        if !token[v] {
            token[v] = true;
            x[v] = 1;
        }
    }
    let mut total: u64 = x.iter().sum();
    let mut n_tok = total;
    let mut tree = SumTree::new(n);
    for (v, &c) in x.iter().enumerate() {
        tree.set(v, c as f64 * (1.0 + table.total(v)));
    }
    let mut t = 0.0;
    let mut out = CoupledRun {
        cp_snapshots: Vec::new(),
        brw_snapshots: Vec::new(),
        violations: 0,
        events: 0,
        cp_extinction: None,
        brw_extinction: None,
    };
    let mut next_snap = 0;
    while total > 0 && total < cap {
        let w = tree.total();
        let t_next = t + rng.sample::<f64, _>(Exp1) / w;
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] < t_next.min(horizon) {
            out.cp_snapshots.push(token.clone());
            out.brw_snapshots.push(x.clone());
            next_snap += 1;
        }
        if t_next > horizon {
            break;
        }
        t = t_next;
        out.events += 1;
        let v = tree.find(rng.random::<f64>() * w);
        let rv = table.total(v);
        let u = rng.random::<f64>() * (1.0 + rv);
        // The acting particle is the token with probability 1/x_v.
        let is_token = token[v] && rng.random::<f64>() * (x[v] as f64) < 1.0;
        if u < 1.0 {
            x[v] -= 1;
            total -= 1;
            tree.set(v, x[v] as f64 * (1.0 + rv));
            if is_token {
                token[v] = false;
                n_tok -= 1;
            }
        } else {
            let target = table.pick(v, u - 1.0);
            x[target] += 1;
            total += 1;
            tree.set(target, x[target] as f64 * (1.0 + table.total(target)));
            if is_token && !token[target] {
                token[target] = true;
                n_tok += 1;
            }
        }
        if n_tok == 0 && out.cp_extinction.is_none() {
            out.cp_extinction = Some(t);
        }
        if token[v] && x[v] == 0 {
            out.violations += 1;
        }
    }
    if total == 0 {
        out.brw_extinction = Some(t);
        if out.cp_extinction.is_none() {
            out.cp_extinction = Some(t);
        }
    }
    while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= horizon {
        out.cp_snapshots.push(token.clone());
        out.brw_snapshots.push(x.clone());
        next_snap += 1;
    }
    out.violations += (0..n).filter(|&v| token[v] && x[v] == 0).count();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stats::Running;

    #[test]
    fn pure_death_mean_particles() {
        let g = MultiGraph::empty(3);
        let p = PenaltySpec::max(1.0, 0.0);
        let table = RateTable::build(&g, &p, true);
        let opts = BrwOptions { snapshot_times: vec![0.5, 1.0], ..BrwOptions::default() };
        let mut rng = rng_from_seed(2);
        let mut at = [Running::default(), Running::default()];
        for _ in 0..40_000 {
            let run = simulate_brw_table(&table, &[2, 1, 1], &opts, &mut rng).unwrap();
            for (k, s) in run.snapshots.iter().enumerate() {
                at[k].push(s.iter().sum::<u64>() as f64);
            }
        }
        for (k, t) in [0.5f64, 1.0].iter().enumerate() {
            let want = 4.0 * (-t).exp();
            assert!((at[k].mean() - want).abs() < 3.0 * at[k].se(), "t={t}");
        }
    }

    #[test]
    fn cap_certifies_survival() {
        let g = MultiGraph::from_edges(2, [(0, 1)]);
        let p = PenaltySpec::max(0.0, 10.0);
        let opts = BrwOptions { cap: 50, ..BrwOptions::default() };
        let run = simulate_brw(&g, &p, &[1, 0], &opts, &mut rng_from_seed(1)).unwrap();
        assert!(run.report.certified);
        assert!(run.report.survived());
        let bad = BrwOptions { cap: 0, ..BrwOptions::default() };
        assert!(simulate_brw(&g, &p, &[1, 0], &bad, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn coupled_single_edge_never_violates() {
        let g = MultiGraph::from_edges(2, [(0, 1)]);
        let p = PenaltySpec::max(1.0, 0.5);
        let mut rng = rng_from_seed(6);
        for _ in 0..2_000 {
            let run = simulate_coupled_cp_brw(&g, &p, &[0], 50.0, &[0.5, 1.0, 2.0], DEFAULT_CAP, &mut rng).unwrap();
            assert_eq!(run.violations, 0);
            for (c, b) in run.cp_snapshots.iter().zip(&run.brw_snapshots) {
                assert!(c.iter().zip(b).all(|(&i, &x)| !i || x > 0));
            }
            if let (Some(a), Some(b)) = (run.cp_extinction, run.brw_extinction) {
                assert!(a <= b);
            }
        }
    }
}
