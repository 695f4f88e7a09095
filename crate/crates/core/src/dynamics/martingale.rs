use rayon::prelude::*;
use serde::Serialize;

use super::brw::{simulate_brw_table, BrwOptions};
use super::penalty::{Penalty, PenaltySpec, RateTable};
use super::report::{EventKind, TraceEvent};
use crate::error::{invalid, Result};
use crate::graph_core::MultiGraph;
use crate::rng::substream;
use crate::stats::{ols, Summary};

/// Interval of exponents `α` for which `Σ x_t(v) d_v^α` is a supermartingale
/// when `λ ≤ a`, together with the prefactor `a`. `None` if empty.
///
/// Product and Max are handled through the monomial lower bounds
/// `(xy)^μ = x^μ y^μ` and `max(x,y)^μ ≥ x^s y^{μ−s}`.
pub fn admissible_alpha(p: &Penalty) -> Option<(f64, f64, f64)> {
    let (a, lo, hi) = match *p {
        Penalty::Monomial { a, mu, nu } => (a, 1.0 - mu, nu),
        Penalty::Product { mu } => (1.0, 1.0 - mu, mu),
        Penalty::Max { mu } if mu >= 1.0 => (1.0, 1.0 - mu, mu),
        Penalty::Max { .. } => return None,
        Penalty::Constant { c } => (c, 1.0, 0.0),
    };
    (lo <= hi).then_some((lo, hi, a))
}

pub fn alpha_is_admissible(p: &Penalty, alpha: f64) -> bool {
    admissible_alpha(p).is_some_and(|(lo, hi, _)| (lo - 1e-12..=hi + 1e-12).contains(&alpha))
}

/// `M_t = Σ_v x_t(v) d_v^α` at time 0 and after every event of a BRW trace.
pub fn martingale_series(g: &MultiGraph, x0: &[u64], trace: &[TraceEvent], alpha: f64) -> Result<Vec<(f64, f64)>> {
    if x0.len() != g.n() {
        return Err(invalid("x0 length does not match the graph"));
    }
    let w = |v: usize| (g.degree(v) as f64).powf(alpha);
    let mut m: f64 = x0.iter().enumerate().map(|(v, &x)| x as f64 * w(v)).sum();
    let mut out = Vec::with_capacity(trace.len() + 1);
    out.push((0.0, m));
    for e in trace {
        let v = e.vertex as usize;
        match e.kind {
            EventKind::Death => m -= w(v),
            EventKind::Birth => m += w(v),
            _ => return Err(invalid("martingale_series expects a BRW trace")),
        }
        out.push((e.time, m));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// OLS slope of `ln E[M_t]` against `t`.
    pub slope: f64,
    /// Batch-means standard error of the slope.
    pub slope_se: f64,
    pub admissible: bool,
    pub predicted: Option<f64>,
}

const BATCHES: usize = 20;

/// Ensemble estimate of `E[M_t]` on a time grid from independent BRW runs.
pub fn martingale_drift(
    g: &MultiGraph,
    p: &PenaltySpec,
    x0: &[u64],
    alpha: f64,
    times: &[f64],
    reps: usize,
    seed: u64,
) -> Result<DriftEstimate> {
    if times.is_empty() || reps < BATCHES {
        return Err(invalid(format!("need a time grid and at least {BATCHES} replicas")));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) || times[0] < 0.0 {
        return Err(invalid("time grid must be increasing and non-negative"));
    }
    let table = RateTable::build(g, p, true);
    let weights: Vec<f64> = (0..g.n()).map(|v| (g.degree(v) as f64).powf(alpha)).collect();
    let opts =
        BrwOptions { horizon: times[times.len() - 1] + 1e-9, snapshot_times: times.to_vec(), ..Default::default() };
    let samples: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[i as u64]);
            let run = simulate_brw_table(&table, x0, &opts, &mut rng)?;
            Ok(run.snapshots.iter().map(|x| x.iter().zip(&weights).map(|(&c, w)| c as f64 * w).sum()).collect())
        })
        .collect::<Result<_>>()?;
    let col = |k: usize, rows: &[Vec<f64>]| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let (mut mean, mut se) = (Vec::new(), Vec::new());
    for k in 0..times.len() {
        let s = Summary::of(&col(k, &samples));
        mean.push(s.mean);
        se.push(s.se);
    }
    let slope_of = |rows: &[Vec<f64>]| -> Option<f64> {
        let ys: Vec<f64> = (0..times.len()).map(|k| Summary::of(&col(k, rows)).mean.ln()).collect();
        ys.iter().all(|y| y.is_finite()).then(|| ols(times, &ys).slope)
    };
    let slope = slope_of(&samples).unwrap_or(f64::NEG_INFINITY);
    let size = reps / BATCHES;
    let batch: Vec<f64> = samples.chunks(size).take(BATCHES).filter_map(slope_of).collect();
    let slope_se = if batch.len() >= 2 { Summary::of(&batch).sd / (batch.len() as f64).sqrt() } else { f64::INFINITY };
    let bounds = admissible_alpha(&p.penalty);
    Ok(DriftEstimate {
        times: times.to_vec(),
        mean,
        se,
        slope,
        slope_se,
        admissible: alpha_is_admissible(&p.penalty, alpha),
        predicted: bounds.map(|(_, _, a)| p.lambda / a - 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_brw;
    use crate::rng::rng_from_seed;

    #[test]
    fn admissible_intervals() {
        assert!(alpha_is_admissible(&Penalty::Product { mu: 0.5 }, 0.5));
        assert!(!alpha_is_admissible(&Penalty::Product { mu: 0.4 }, 0.5));
        assert!(alpha_is_admissible(&Penalty::Monomial { a: 2.0, mu: 0.3, nu: 0.9 }, 0.8));
        assert!(!alpha_is_admissible(&Penalty::Max { mu: 0.75 }, 0.5));
        assert!(alpha_is_admissible(&Penalty::Max { mu: 1.0 }, 0.5));
    }

    #[test]
    fn series_tracks_trace() {
        let g = MultiGraph::from_edges(3, [(0, 1), (1, 2)]);
        let p = PenaltySpec::product(0.5, 0.9);
        let x0 = vec![0, 2, 0];
        let run = simulate_brw(
            &g,
            &p,
            &x0,
            &BrwOptions { horizon: 3.0, trace: true, ..Default::default() },
            &mut rng_from_seed(1),
        )
        .unwrap();
        let s = martingale_series(&g, &x0, &run.trace, 0.5).unwrap();
        assert!((s[0].1 - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.len(), run.trace.len() + 1);
        assert!(s.iter().all(|&(_, m)| m >= -1e-9));
    }

    #[test]
    fn pure_death_mean() {
        let g = MultiGraph::from_edges(3, [(0, 1), (1, 2)]);
        let p = PenaltySpec::product(0.5, 0.0);
        let est = martingale_drift(&g, &p, &[1, 1, 1], 0.5, &[0.0, 0.5, 1.0], 20_000, 3).unwrap();
        let m0 = 2.0 + 2f64.sqrt();
        for (k, &t) in est.times.iter().enumerate() {
            let expect = m0 * (-t).exp();
            assert!((est.mean[k] - expect).abs() < 3.5 * est.se[k].max(1e-12), "t={t}");
        }
        assert!((est.slope + 1.0).abs() < 4.0 * est.slope_se);
    }
}
