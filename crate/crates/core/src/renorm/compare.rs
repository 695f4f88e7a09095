use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cone::{op_cluster, ConeConfig};
use crate::dynamics::{
    conditioned_leaf_count, infestation_status, simulate_cp_table, star_survival_experiment, CpOptions, PenaltySpec,
    RateTable, StarConfig,
};
use crate::error::{invalid, Result};
use crate::graph_core::{build_star_row, StarRow};
use crate::rng::substream;
use crate::stats::proportion;

#[derive(Debug, Clone)]
pub struct CompareParams {
    pub k: usize,
    pub ell: usize,
    pub mu: f64,
    pub lambda: f64,
    /// Number of time layers; the row has this many stars.
    pub layers: usize,
    pub reps: usize,
    /// Replicates for the star-survival fit and the two-star transfer estimate.
    pub fit_reps: usize,
    /// Overrides the fitted time unit.
    pub t_unit: Option<f64>,
    pub seed: u64,
}

impl CompareParams {
    pub fn new(k: usize, ell: usize, mu: f64, lambda: f64, layers: usize, reps: usize, seed: u64) -> Self {
        Self { k, ell, mu, lambda, layers, reps, fit_reps: reps, t_unit: None, seed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub x: usize,
    pub y: usize,
    pub eta_freq: f64,
    pub eta_se: f64,
    pub infested_freq: f64,
    pub infested_se: f64,
    /// `eta_freq ≤ infested_freq` within three combined standard errors.
    pub dominated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RenormTable {
    /// Median survival time of a lone star started from its center.
    pub t_unit: f64,
    /// Fraction of two-star runs where star 2 is infested one time unit after star 1 was.
    pub transfer: f64,
    pub transfer_se: f64,
    pub delta_hat: f64,
    /// Fraction of row runs where star 1 is infested at time `t_unit`.
    pub p_first: f64,
    pub rows: Vec<CompareRow>,
}

impl RenormTable {
    pub fn all_dominated(&self) -> bool {
        self.rows.iter().all(|r| r.dominated)
    }
}

/// Star 1 infested through its conditioned leaf count; everything else healthy.
fn initial_state(row: &StarRow, p: &PenaltySpec, k: usize) -> Vec<usize> {
    let mut v = vec![row.centers[0]];
    v.extend_from_slice(&row.leaves[0][..conditioned_leaf_count(p, k)]);
    v
}

/// Infestation of every star at times `t·1, …, t·layers`: `out[y-1][x-1]`.
fn infestation_grid<R: Rng + ?Sized>(
    row: &StarRow,
    table: &RateTable,
    xi0: &[usize],
    t_unit: f64,
    layers: usize,
    r: f64,
    rng: &mut R,
) -> Result<Vec<Vec<bool>>> {
    let times: Vec<f64> = (1..=layers).map(|y| y as f64 * t_unit).collect();
    let opts = CpOptions { horizon: layers as f64 * t_unit, snapshot_times: times, ..CpOptions::default() };
    let run = simulate_cp_table(table, xi0, &opts, rng)?;
    let n = row.graph.n();
    Ok(run
        .snapshots
        .iter()
        .map(|snap| {
            let mut state = vec![false; n];
            for &v in snap {
                state[v] = true;
            }
            row.centers.iter().zip(&row.leaves).map(|(&c, l)| infestation_status(&state, c, l, r)).collect()
        })
        .collect())
}

/// Runs the contact process on a row of stars and oriented percolation with the
/// empirically matched closing probability, and compares per-site frequencies.
///
/// The percolation root is kept with probability `p_first`, the observed chance that
/// star 1 is infested after one time unit, so both sides are unconditional.
pub fn renorm_compare(params: &CompareParams) -> Result<RenormTable> {
    let CompareParams { k, ell, mu, lambda, layers, reps, fit_reps, t_unit, seed } = params.clone();
    if !(mu < 0.5) {
        return Err(invalid("the star-row comparison needs μ < 1/2"));
    }
    if layers == 0 || reps == 0 || fit_reps == 0 {
        return Err(invalid("layers and replicate counts must be positive"));
    }
    let p = PenaltySpec::product(mu, lambda);
    let r = lambda * (k as f64).powf(-mu);
    let t_unit = match t_unit {
        Some(t) => t,
        None => {
            let cfg = StarConfig::new(k, p, fit_reps, 1e7, seed);
            star_survival_experiment(&cfg)?.median
        }
    };
    if !(t_unit > 0.0) {
        return Err(invalid("time unit must be positive"));
    }

    let pair = build_star_row(k, ell, 2)?;
    let pair_table = RateTable::build(&pair.graph, &p, false);
    let pair_start = initial_state(&pair, &p, k);
    let hits = (0..fit_reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[1, i as u64]);
            infestation_grid(&pair, &pair_table, &pair_start, t_unit, 1, r, &mut rng).map(|g| usize::from(g[0][1]))
        })
        .sum::<Result<usize>>()?;
    let (transfer, transfer_se) = proportion(hits, fit_reps);
    let delta_hat = 1.0 - transfer;

    let line = build_star_row(k, ell, layers)?;
    let table = RateTable::build(&line.graph, &p, false);
    let start = initial_state(&line, &p, k);
    let grids = (0..reps)
        .into_par_iter()
        .map(|i| infestation_grid(&line, &table, &start, t_unit, layers, r, &mut substream(seed, &[2, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let first = grids.iter().filter(|g| g[0][0]).count();
    let p_first = first as f64 / reps as f64;

    let cone = ConeConfig::new(delta_hat.clamp(0.0, 1.0), layers)?;
    let clusters: Vec<_> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &[3, i as u64]);
            let keep = rng.random::<f64>() < p_first;
            (keep, op_cluster(&cone, &mut rng))
        })
        .collect();

    let mut rows = Vec::new();
    for y in 1..=layers {
        for x in (1..=y.min(layers)).filter(|x| (x + y) % 2 == 0) {
            let inf = grids.iter().filter(|g| g[y - 1][x - 1]).count();
            let eta = clusters.iter().filter(|(keep, c)| *keep && c.contains(x, y)).count();
            let (inf_f, inf_se) = proportion(inf, reps);
            let (eta_f, eta_se) = proportion(eta, reps);
            let tol = 3.0 * (inf_se * inf_se + eta_se * eta_se).sqrt();
            rows.push(CompareRow {
                x,
                y,
                eta_freq: eta_f,
                eta_se,
                infested_freq: inf_f,
                infested_se: inf_se,
                dominated: eta_f <= inf_f + tol,
            });
        }
    }
    Ok(RenormTable { t_unit, transfer, transfer_se, delta_hat, p_first, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_dies_at_once() {
        let mut p = CompareParams::new(20, 2, 0.25, 0.0, 3, 50, 1);
        p.t_unit = Some(1.0);
        let t = renorm_compare(&p).unwrap();
        assert_eq!(t.transfer, 0.0);
        assert_eq!(t.delta_hat, 1.0);
        // Nothing leaves star 1: the cluster stops at the root and only the initial
        // leaves of star 1 can still be infected.
        assert!(t.rows.iter().filter(|r| r.y >= 2).all(|r| r.eta_freq == 0.0));
        assert!(t.rows.iter().filter(|r| r.x >= 2).all(|r| r.infested_freq == 0.0));
        assert!(t.all_dominated());
    }

    #[test]
    fn rejects_large_mu() {
        assert!(renorm_compare(&CompareParams::new(20, 2, 0.6, 1.0, 3, 10, 1)).is_err());
    }
}
