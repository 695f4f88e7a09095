use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use super::path::{path_weight, preimages, tau, tau_sequence, PathLabel, PREIMAGE_CAP};
use crate::dynamics::PenaltySpec;
use crate::error::{invalid, Error, Result};
use crate::graph_core::MultiGraph;

pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub case_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub enumerated: usize,
}

impl BoundReport {
    pub fn new(case_id: impl Into<String>, lhs: f64, rhs: f64, enumerated: usize) -> Self {
        BoundReport { case_id: case_id.into(), lhs, rhs, holds: lhs <= rhs + SLACK, enumerated }
    }
}

/// CSV with columns `case_id,lhs,rhs,holds`.
pub fn write_bound_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case_id", "lhs", "rhs", "holds"])?;
    for r in reports {
        w.write_record([r.case_id.clone(), r.lhs.to_string(), r.rhs.to_string(), r.holds.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn max_off_diagonal(g: &MultiGraph, u: usize) -> u32 {
    g.neighbors(u).iter().map(|&(_, m)| m).max().unwrap_or(0)
}

fn max_edge_multiplicity(g: &MultiGraph) -> u32 {
    (0..g.n()).map(|u| max_off_diagonal(g, u)).max().unwrap_or(0)
}

/// Enumerates `(g^{(k)})^{−1}(π)` under the max penalty and compares the three
/// backtracking-removal bounds with their enumerated left-hand sides:
/// the one-step bound per `τ(π′) = a`, the `k`-step bound per `τ`-sequence, and
/// the overall `2^{𝔩(π)}(4λ² max e)^k z(π)`.
pub fn verify_backtrack_bounds(
    g: &MultiGraph,
    pi: &PathLabel,
    lambda: f64,
    mu: f64,
    k: usize,
) -> Result<Vec<BoundReport>> {
    if mu < 0.5 {
        return Err(invalid("backtracking bounds need μ ≥ 1/2"));
    }
    let p = PenaltySpec::max(mu, lambda);
    let z = path_weight(g, &p, pi);
    let mut out = Vec::new();
    if k >= 1 {
        let one = preimages(g, pi, 1, PREIMAGE_CAP)?;
        let mut by_a: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for q in &one {
            let e = by_a.entry(tau(q).expect("preimage backtracks")).or_default();
            e.0 += path_weight(g, &p, q);
            e.1 += 1;
        }
        for a in 2..=pi.len() + 2 {
            let (lhs, n) = by_a.get(&a).copied().unwrap_or_default();
            let rhs = lambda * lambda * z * max_off_diagonal(g, pi.vertices()[a - 2]) as f64;
            out.push(BoundReport::new(format!("{pi}/remove_one/a={a}"), lhs, rhs, n));
        }
    }
    let ell = max_edge_multiplicity(g) as f64;
    let all = preimages(g, pi, k, PREIMAGE_CAP)?;
    if k >= 1 {
        let mut by_seq: BTreeMap<Vec<usize>, (f64, usize)> = BTreeMap::new();
        for q in &all {
            let e = by_seq.entry(tau_sequence(q, k)?).or_default();
            e.0 += path_weight(g, &p, q);
            e.1 += 1;
        }
        let rhs = (ell * lambda * lambda).powi(k as i32) * z;
        for (seq, (lhs, n)) in by_seq {
            out.push(BoundReport::new(format!("{pi}/k={k}/tau={seq:?}"), lhs, rhs, n));
        }
    }
    let total: f64 = all.iter().map(|q| path_weight(g, &p, q)).sum();
    let rhs = 2f64.powi(pi.len() as i32) * (4.0 * lambda * lambda * ell).powi(k as i32) * z;
    out.push(BoundReport::new(format!("{pi}/k={k}/total"), total, rhs, all.len()));
    Ok(out)
}

/// Number of paths from `start` of length at most `n` with no backtracking step.
/// Loop traversals are steps but never backtracks.
pub fn count_nonbacktracking(g: &MultiGraph, start: usize, n: usize) -> Result<u128> {
    if start >= g.n() {
        return Err(Error::VertexOutOfRange(start));
    }
    const NONE: usize = usize::MAX;
    let mut level: HashMap<(usize, usize), u128> = HashMap::from([((start, NONE), 1)]);
    let mut total: u128 = 1;
    for _ in 0..n {
        let mut next: HashMap<(usize, usize), u128> = HashMap::new();
        for (&(cur, prev), &c) in &level {
            let nbrs = g.neighbors(cur).iter().map(|&(w, _)| w as usize);
            let self_loop = (g.loops(cur) > 0).then_some(cur);
            for w in nbrs.chain(self_loop) {
                if w == prev && prev != cur {
                    continue;
                }
                *next.entry((w, cur)).or_default() += c;
            }
        }
        total = total.saturating_add(next.values().fold(0u128, |a, &b| a.saturating_add(b)));
        level = next;
    }
    Ok(total)
}

/// Checks `|ℬ_N| ≤ (2k+1)^N |𝒯_N|` for a simple tree plus `k` extra edges whose
/// endpoints' root distances differ by at most one.
pub fn surplus_path_bound_check(
    tree: &MultiGraph,
    root: usize,
    extra: &[(usize, usize)],
    n: usize,
) -> Result<BoundReport> {
    if root >= tree.n() {
        return Err(Error::VertexOutOfRange(root));
    }
    if !tree.is_simple() || tree.edge_count() + 1 != tree.n() || tree.component_count() != 1 {
        return Err(invalid("base graph must be a simple tree"));
    }
    let dist = tree.bfs_distances(root);
    for &(u, v) in extra {
        if u >= tree.n() || v >= tree.n() {
            return Err(Error::VertexOutOfRange(u.max(v)));
        }
        if dist[u].abs_diff(dist[v]) > 1 {
            return Err(invalid(format!("extra edge ({u},{v}) joins depths {} and {}", dist[u], dist[v])));
        }
    }
    let aug = tree.with_extra_edges(extra);
    let b = count_nonbacktracking(&aug, root, n)? as f64;
    let t_n = dist.iter().filter(|&&d| d <= n).count() as f64;
    let rhs = ((2 * extra.len() + 1) as f64).powi(n as i32) * t_n;
    Ok(BoundReport::new(format!("surplus/k={}/N={n}", extra.len()), b, rhs, b as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::build_star;

    #[test]
    fn star_single_step_is_tight() {
        let g = build_star(3).unwrap();
        let lambda = 0.7;
        let reps = verify_backtrack_bounds(&g, &PathLabel::single(0), lambda, 0.5, 1).unwrap();
        let one = &reps[0];
        assert!((one.lhs - lambda * lambda).abs() < 1e-14);
        assert!((one.rhs - lambda * lambda).abs() < 1e-14);
        assert!(reps.iter().all(|r| r.holds));
    }

    #[test]
    fn k_zero_is_trivial() {
        let g = MultiGraph::from_edges(4, [(0, 1), (1, 2), (1, 3)]);
        let pi = PathLabel::new(&g, vec![0, 1, 2]).unwrap();
        let reps = verify_backtrack_bounds(&g, &pi, 0.3, 0.75, 0).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(reps[0].holds && reps[0].enumerated == 1);
    }

    #[test]
    fn rejects_small_mu() {
        let g = build_star(2).unwrap();
        assert!(verify_backtrack_bounds(&g, &PathLabel::single(0), 0.3, 0.4, 1).is_err());
    }

    #[test]
    fn nonbacktracking_counts() {
        let path = MultiGraph::from_edges(3, [(0, 1), (1, 2)]);
        assert_eq!(count_nonbacktracking(&path, 0, 2).unwrap(), 3);
        assert_eq!(count_nonbacktracking(&build_star(3).unwrap(), 0, 2).unwrap(), 4);
        let c4 = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(count_nonbacktracking(&c4, 2, 3).unwrap(), 7);
        // a loop may be traversed repeatedly and does not backtrack
        let lp = MultiGraph::from_edges(1, [(0, 0)]);
        assert_eq!(count_nonbacktracking(&lp, 0, 3).unwrap(), 4);
    }

    #[test]
    fn surplus_bound_binary_tree() {
        // binary tree of depth 3, vertices 0..15, children of v are 2v+1, 2v+2
        let edges: Vec<(usize, usize)> = (1..15).map(|v| ((v - 1) / 2, v)).collect();
        let t = MultiGraph::from_edges(15, edges);
        let plain = surplus_path_bound_check(&t, 0, &[], 4).unwrap();
        assert!(plain.holds);
        assert_eq!(plain.lhs, 15.0);
        let r = surplus_path_bound_check(&t, 0, &[(3, 4)], 4).unwrap();
        assert!(r.holds && r.lhs > 15.0);
        assert!(surplus_path_bound_check(&t, 0, &[(0, 7)], 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_bound_csv(&[BoundReport::new("x", 1.0, 2.0, 1)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "case_id,lhs,rhs,holds\nx,1,2,true\n");
    }
}
