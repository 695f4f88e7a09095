use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph_core::MultiGraph;

/// Outcome of the greedy certificate on one vertex subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubsetVerdict {
    /// A valid index set of the required size was built.
    Certified,
    /// Fewer than the required number of subset vertices even have `k/2` distinct
    /// neighbours, so no certificate can exist.
    Refuted,
    /// Greedy failed but the simple counting argument does not rule a certificate out.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    /// `⌊δn⌋`.
    pub subset_size: usize,
    /// Required number of good indices, `⌈⌊δn⌋/8⌉`.
    pub target: usize,
    pub trials: usize,
    pub certified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
}

impl ExpansionReport {
    pub fn pass_rate(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.certified as f64 / self.trials as f64
    }

    /// True when some sampled subset provably has no certificate.
    pub fn graph_refuted(&self) -> bool {
        self.refuted > 0
    }
}

/// A certificate: good subset vertices with their disjoint neighbour sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub good: Vec<(usize, Vec<usize>)>,
}

fn required(subset_size: usize) -> usize {
    subset_size.div_ceil(8)
}

/// Greedy certificate for one subset. Vertices with fewer distinct neighbours go
/// first; a chosen vertex and its `k/2` neighbours are blocked for later choices.
pub fn certify_subset(g: &MultiGraph, subset: &[usize], k: usize) -> (SubsetVerdict, Option<Certificate>) {
    let half = k / 2;
    let target = required(subset.len());
    let distinct = |v: usize| g.neighbors(v).len();
    let mut order: Vec<usize> = subset.iter().copied().filter(|&v| distinct(v) >= half).collect();
    if order.len() < target {
        return (SubsetVerdict::Refuted, None);
    }
    order.sort_by_key(|&v| (distinct(v), v));
    let mut blocked = vec![false; g.n()];
    let mut good = Vec::new();
    for v in order {
        if good.len() >= target {
            break;
        }
        if blocked[v] {
            continue;
        }
        let picks: Vec<usize> =
            g.neighbors(v).iter().map(|e| e.0 as usize).filter(|&w| !blocked[w]).take(half).collect();
        if picks.len() < half {
            continue;
        }
        blocked[v] = true;
        for &w in &picks {
            blocked[w] = true;
        }
        good.push((v, picks));
    }
    if good.len() >= target {
        (SubsetVerdict::Certified, Some(Certificate { good }))
    } else {
        (SubsetVerdict::Inconclusive, None)
    }
}

/// Samples `trials` uniform `⌊δn⌋`-subsets and runs [`certify_subset`] on each.
pub fn delta_k_good_check<R: Rng + ?Sized>(
    g: &MultiGraph,
    delta: f64,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<ExpansionReport> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(invalid("k must be a positive even integer"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("δ must lie in (0, 1)"));
    }
    let n = g.n();
    let subset_size = (delta * n as f64).floor() as usize;
    if subset_size == 0 {
        return Err(invalid("⌊δn⌋ must be at least 1"));
    }
    let mut report = ExpansionReport {
        n,
        k,
        delta,
        subset_size,
        target: required(subset_size),
        trials,
        certified: 0,
        refuted: 0,
        inconclusive: 0,
    };
    for _ in 0..trials {
        let subset = sample(rng, n, subset_size).into_vec();
        match certify_subset(g, &subset, k).0 {
            SubsetVerdict::Certified => report.certified += 1,
            SubsetVerdict::Refuted => report.refuted += 1,
            SubsetVerdict::Inconclusive => report.inconclusive += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_configuration_model, sample_degree_sequence, DegreePmf, OddSum};
    use crate::rng::rng_from_seed;
    use std::collections::HashSet;

    fn disjoint_stars(count: usize, k: usize) -> (MultiGraph, Vec<usize>) {
        let centers: Vec<usize> = (0..count).map(|i| i * (k + 1)).collect();
        let edges = centers.iter().flat_map(|&c| (1..=k).map(move |l| (c, c + l)));
        (MultiGraph::from_edges(count * (k + 1), edges), centers)
    }

    #[test]
    fn star_centers_are_certified() {
        let (g, centers) = disjoint_stars(16, 4);
        let (verdict, cert) = certify_subset(&g, &centers, 4);
        assert_eq!(verdict, SubsetVerdict::Certified);
        let cert = cert.unwrap();
        assert_eq!(cert.good.len(), 2);
        let mut seen = HashSet::new();
        for (v, ws) in &cert.good {
            assert_eq!(ws.len(), 2);
            assert!(seen.insert(*v));
            for w in ws {
                assert!(seen.insert(*w) && g.multiplicity(*v, *w) > 0);
            }
        }
    }

    #[test]
    fn matching_is_refuted() {
        let g = MultiGraph::from_edges(40, (0..20).map(|i| (2 * i, 2 * i + 1)));
        let r = delta_k_good_check(&g, 0.2, 4, 50, &mut rng_from_seed(3)).unwrap();
        assert_eq!(r.refuted, 50);
        assert!(r.graph_refuted());
        assert_eq!(r.pass_rate(), 0.0);
    }

    #[test]
    fn bad_parameters() {
        let g = MultiGraph::empty(10);
        let mut rng = rng_from_seed(1);
        assert!(delta_k_good_check(&g, 0.5, 3, 1, &mut rng).is_err());
        assert!(delta_k_good_check(&g, 0.05, 2, 1, &mut rng).is_err());
    }

    #[test]
    fn dense_cm_passes() {
        let k = 4;
        let pmf = DegreePmf::uniform(&(k..=k * k).collect::<Vec<_>>()).unwrap();
        let mut rng = rng_from_seed(11);
        let degs = sample_degree_sequence(&pmf, 2000, &mut rng);
        let (g, _) = build_configuration_model(&degs, OddSum::AutoFix, &mut rng).unwrap();
        let r = delta_k_good_check(&g, 0.01, k, 1000, &mut rng).unwrap();
        assert_eq!(r.certified, 1000, "{r:?}");
    }
}
