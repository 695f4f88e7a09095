use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::PenaltySpec;
use crate::error::{Error, Result};
use crate::graph_core::MultiGraph;

/// A genealogical label: a vertex sequence with consecutive vertices adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathLabel(Vec<usize>);

impl PathLabel {
    /// Checks adjacency on `g`.
    pub fn new(g: &MultiGraph, vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("a path needs at least one vertex".into()));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= g.n()) {
            return Err(Error::VertexOutOfRange(v));
        }
        if let Some(w) = vertices.windows(2).find(|w| g.multiplicity(w[0], w[1]) == 0) {
            return Err(Error::NotAdjacent(w[0], w[1]));
        }
        Ok(PathLabel(vertices))
    }

    /// No adjacency check; for paths built from ones already known to be valid.
    pub fn from_vec_unchecked(vertices: Vec<usize>) -> Self {
        PathLabel(vertices)
    }

    pub fn single(v: usize) -> Self {
        PathLabel(vec![v])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 1
    }

    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn end(&self) -> usize {
        *self.0.last().expect("non-empty path")
    }

    pub fn parent(&self) -> Option<PathLabel> {
        (self.0.len() > 1).then(|| PathLabel(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `∏ r(π_i, π_{i+1})`, in log space for long paths.
pub fn path_weight(g: &MultiGraph, p: &PenaltySpec, pi: &PathLabel) -> f64 {
    let rate = |(u, v): (usize, usize)| p.rate(g.multiplicity(u, v), g.degree(u), g.degree(v));
    if pi.len() > 64 {
        pi.steps().map(|s| rate(s).ln()).sum::<f64>().exp()
    } else {
        pi.steps().map(rate).product()
    }
}

/// `z(π) = x₀(π₀) ∏ r(π_i, π_{i+1})`.
pub fn z_weight(g: &MultiGraph, p: &PenaltySpec, pi: &PathLabel, x0: &[u64]) -> Result<f64> {
    let start = *x0.get(pi.start()).ok_or(Error::VertexOutOfRange(pi.start()))?;
    if let Some((u, v)) = pi.steps().find(|&(u, v)| g.multiplicity(u, v) == 0) {
        return Err(Error::NotAdjacent(u, v));
    }
    Ok(start as f64 * path_weight(g, p, pi))
}

/// `P(X_m ≥ t)` for `X_m` a sum of `m` unit exponentials: `Σ_{j<m} e^{−t} t^j / j!`.
/// `X_0 = 0`, so `erlang_tail(0, t) = 1{t ≤ 0}`.
pub fn erlang_tail(m: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut term = (-t).exp();
    let mut sum = 0.0;
    for j in 0..m {
        if j > 0 {
            term *= t / j as f64;
        }
        sum += term;
    }
    sum.min(1.0)
}

/// `E[y_t(π)] = z(π) t^m/m! e^{−t}` with `m = 𝔩(π)`.
pub fn expected_occupancy(g: &MultiGraph, p: &PenaltySpec, pi: &PathLabel, x0: &[u64], t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidInput("t must be non-negative".into()));
    }
    let m = pi.len();
    let ln_poisson = m as f64 * t.ln() - (1..=m).map(|j| (j as f64).ln()).sum::<f64>() - t;
    let factor = if m == 0 { (-t).exp() } else { ln_poisson.exp() };
    Ok(z_weight(g, p, pi, x0)? * factor)
}

/// First backtracking index: least `i ≥ 2` with `π_i = π_{i−2} ≠ π_{i−1}`.
pub fn tau(pi: &PathLabel) -> Option<usize> {
    let v = pi.vertices();
    (2..v.len()).find(|&i| v[i] == v[i - 2] && v[i] != v[i - 1])
}

/// `g(π)`: drops `π_{τ−1}` and `π_τ`.
pub fn erase_first(pi: &PathLabel) -> Result<PathLabel> {
    let t = tau(pi).ok_or(Error::NoBacktrack)?;
    let v = pi.vertices();
    let mut out = Vec::with_capacity(v.len() - 2);
    out.extend_from_slice(&v[..t - 1]);
    out.extend_from_slice(&v[t + 1..]);
    Ok(PathLabel(out))
}

/// All `π′` with `g(π′) = π`: insert a back-and-forth step `(w, π_i)` after `π_i`.
pub fn preimages_one(g: &MultiGraph, pi: &PathLabel) -> Vec<PathLabel> {
    let v = pi.vertices();
    let mut out = Vec::new();
    for i in 0..v.len() {
        let u = v[i];
        for &(w, _) in g.neighbors(u) {
            let w = w as usize;
            if w == u {
                continue;
            }
            let mut cand = Vec::with_capacity(v.len() + 2);
            cand.extend_from_slice(&v[..=i]);
            cand.push(w);
            cand.extend_from_slice(&v[i..]);
            let cand = PathLabel(cand);
            if tau(&cand) == Some(i + 2) {
                out.push(cand);
            }
        }
    }
    out
}

pub const PREIMAGE_CAP: usize = 1_000_000;

/// `(g^{(k)})^{−1}(π)`. Errors once more than `cap` paths would be produced.
pub fn preimages(g: &MultiGraph, pi: &PathLabel, k: usize, cap: usize) -> Result<Vec<PathLabel>> {
    let mut level = vec![pi.clone()];
    for _ in 0..k {
        let mut next = Vec::new();
        for q in &level {
            next.extend(preimages_one(g, q));
            if next.len() > cap {
                return Err(Error::EnumerationCap(cap));
            }
        }
        level = next;
    }
    Ok(level)
}

/// `τ(π′), τ(g(π′)), …` for the `k` erasures taking `π′` down to its image.
pub fn tau_sequence(pi: &PathLabel, k: usize) -> Result<Vec<usize>> {
    let mut cur = pi.clone();
    let mut seq = Vec::with_capacity(k);
    for _ in 0..k {
        seq.push(tau(&cur).ok_or(Error::NoBacktrack)?);
        cur = erase_first(&cur)?;
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> MultiGraph {
        MultiGraph::from_edges(3, [(0, 1), (1, 2)])
    }

    fn path(v: &[usize]) -> PathLabel {
        PathLabel(v.to_vec())
    }

    #[test]
    fn z_weight_hand_values() {
        let g = abc();
        let p = PenaltySpec::max(1.0, 0.5);
        assert_eq!(z_weight(&g, &p, &path(&[1]), &[0, 3, 0]).unwrap(), 3.0);
        let z = z_weight(&g, &p, &path(&[0, 1, 2]), &[1, 0, 0]).unwrap();
        assert!((z - 0.0625).abs() < 1e-15);
        assert!(matches!(z_weight(&g, &p, &path(&[0, 2]), &[1, 0, 0]), Err(Error::NotAdjacent(0, 2))));
    }

    #[test]
    fn erlang_values() {
        assert!((erlang_tail(1, 1.7) - (-1.7f64).exp()).abs() < 1e-15);
        assert!((erlang_tail(2, 1.0) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert_eq!(erlang_tail(3, 0.0), 1.0);
        let g = abc();
        let occ = expected_occupancy(&g, &PenaltySpec::max(1.0, 0.5), &path(&[1]), &[0, 1, 0], 2.0).unwrap();
        assert!((occ - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tau_and_erasure() {
        assert_eq!(tau(&path(&[0, 1, 0])), Some(2));
        assert_eq!(erase_first(&path(&[0, 1, 0])).unwrap(), path(&[0]));
        assert_eq!(tau(&path(&[0, 1, 2])), None);
        assert!(matches!(erase_first(&path(&[0, 1, 2])), Err(Error::NoBacktrack)));
        assert_eq!(tau(&path(&[0, 1, 2, 1])), Some(3));
        assert_eq!(erase_first(&path(&[0, 1, 2, 1])).unwrap(), path(&[0, 1]));
        // loop traversal is not a backtrack
        assert_eq!(tau(&path(&[0, 0, 0])), None);
    }

    #[test]
    fn preimages_invert_erasure() {
        let g = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 1)]);
        let pi = path(&[0, 1, 2]);
        for k in 0..3 {
            let pre = preimages(&g, &pi, k, PREIMAGE_CAP).unwrap();
            let mut seen = std::collections::HashSet::new();
            for q in &pre {
                assert_eq!(q.len(), pi.len() + 2 * k);
                assert!(seen.insert(q.clone()));
                let mut cur = q.clone();
                for _ in 0..k {
                    cur = erase_first(&cur).unwrap();
                }
                assert_eq!(cur, pi);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(preimages(&g, &path(&[0]), 6, 10), Err(Error::EnumerationCap(10))));
    }
}
