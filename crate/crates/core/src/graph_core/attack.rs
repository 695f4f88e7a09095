use serde::Serialize;

use super::pmf::binomial_pmf;
use super::{DegreePmf, MultiGraph, TailClass};
use crate::error::{invalid, Result};

/// Outcome of deleting every vertex of degree `> M`.
#[derive(Debug, Clone)]
pub struct AttackResult {
    pub threshold: usize,
    /// Induced subgraph on the survivors, re-indexed.
    pub graph: MultiGraph,
    /// New index → original vertex.
    pub kept: Vec<usize>,
    /// `|V_{≤M}|`.
    pub v_le_m: usize,
    /// Half-edges at survivors / at deleted vertices.
    pub h_le_m: usize,
    pub h_gt_m: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackCounts {
    pub threshold: usize,
    pub v_le_m: usize,
    pub h_le_m: usize,
    pub h_gt_m: usize,
}

impl AttackResult {
    /// Attacked degrees `d̃_v` in new-index order.
    pub fn attacked_degrees(&self) -> &[usize] {
        self.graph.degrees()
    }

    /// Empirical law of `d̃` over `V_{≤M}`.
    pub fn empirical_pmf(&self) -> Option<DegreePmf> {
        (self.v_le_m > 0).then(|| DegreePmf::empirical(self.attacked_degrees()).expect("nonempty sample"))
    }

    pub fn counts(&self) -> AttackCounts {
        AttackCounts { threshold: self.threshold, v_le_m: self.v_le_m, h_le_m: self.h_le_m, h_gt_m: self.h_gt_m }
    }
}

pub fn targeted_attack(g: &MultiGraph, m: usize) -> AttackResult {
    let keep: Vec<bool> = g.degrees().iter().map(|&d| d <= m).collect();
    let h_le_m = g.degrees().iter().filter(|&&d| d <= m).sum();
    let h_gt_m = g.half_edge_count() - h_le_m;
    let (graph, kept) = g.induced_subgraph(&keep);
    AttackResult { threshold: m, v_le_m: kept.len(), graph, kept, h_le_m, h_gt_m }
}

/// Limiting attacked degree law: `p_M(i) = P(Bin(D, q_M) = i | D ≤ M)` with
/// `q_M = E[D·1{D≤M}]/E[D]`. Returns `(p_M, q_M)`.
pub fn binomial_thinning_pmf(pmf: &DegreePmf, m: usize) -> Result<(DegreePmf, f64)> {
    let mean = pmf.mean();
    let p_le = pmf.cdf(m);
    if !(mean > 0.0) || !(p_le > 0.0) {
        return Err(invalid("thinning needs E[D] > 0 and P(D ≤ M) > 0"));
    }
    let q = (pmf.expect(|v| if v <= m { v as f64 } else { 0.0 }) / mean).min(1.0);
    let top = pmf.values().iter().copied().filter(|&v| v <= m).max().unwrap_or(0);
    let mut mass = vec![0.0; top + 1];
    for (j, pj) in pmf.support().filter(|&(v, _)| v <= m) {
        for (i, slot) in mass.iter_mut().enumerate().take(j + 1) {
            *slot += pj / p_le * binomial_pmf(j, q, i);
        }
    }
    let pmf = DegreePmf::from_weights(mass.into_iter().enumerate().collect(), TailClass::Truncated { z_max: m })?;
    Ok((pmf, q))
}
