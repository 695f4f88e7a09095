use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{simulate_brw_table, BrwOptions, EventKind, PenaltySpec, RateTable};
use crate::error::{invalid, Error, Result};
use crate::graph_core::{LazyTree, MultiGraph, NodeId};
use crate::rng::substream;
use crate::stats::proportion;

/// `(ζ(u), ζ̃(u))` along the root geodesic of `u`. `ζ̃` is `None` at the root.
pub fn zeta_weights(tree: &LazyTree, u: NodeId, mu: f64) -> (f64, Option<f64>) {
    let path = tree.geodesic(u);
    let d = |v: NodeId| tree.degree(v) as f64;
    let zeta = path.windows(2).map(|w| d(w[0]).max(d(w[1])).powf(-mu)).product();
    let tilde = (path.len() > 1).then(|| {
        let interior: f64 = path[1..path.len() - 1].iter().map(|&v| (d(v) - 1.0).powf(-mu)).product();
        d(path[0]).powf(-mu) * interior
    });
    (zeta, tilde)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    /// `(N, (2λ)^N Σ_{u∈Gen_N} ζ(u))`, or with `ζ̃` from `N = 1`.
    pub terms: Vec<(usize, f64)>,
    pub partial_sums: Vec<f64>,
    /// Ratio of successive terms.
    pub ratios: Vec<f64>,
    /// `λ ≥ 1/2`, outside the regime the criterion is derived for.
    pub warn: bool,
}

/// Generation sums of `ζ` (or `ζ̃`) for `N ≤ n_max`, expanding the tree lazily.
pub fn generation_zeta_sums(
    tree: &mut LazyTree,
    mu: f64,
    n_max: usize,
    use_tilde: bool,
    budget: usize,
) -> Result<Vec<f64>> {
    if n_max > tree.max_depth() {
        return Err(invalid(format!("n_max {n_max} exceeds tree depth {}", tree.max_depth())));
    }
    let root = tree.root();
    let mut level: Vec<(NodeId, f64, f64)> = vec![(root, 1.0, f64::NAN)];
    let mut sums = vec![if use_tilde { f64::NAN } else { 1.0 }];
    for n in 1..=n_max {
        let mut next = Vec::new();
        for &(v, z, zt) in &level {
            let dv = tree.degree(v) as f64;
            let kids = tree.expand(v);
            if tree.len() > budget {
                return Err(Error::Budget(format!("tree exceeded {budget} nodes at generation {n}")));
            }
            for c in kids {
                let dc = tree.degree(c) as f64;
                let zc = z * dv.max(dc).powf(-mu);
                let ztc = if v == root { dv.powf(-mu) } else { zt * (dv - 1.0).powf(-mu) };
                next.push((c, zc, ztc));
            }
        }
        sums.push(next.iter().map(|&(_, z, zt)| if use_tilde { zt } else { z }).sum());
        level = next;
    }
    Ok(sums)
}

pub fn extinction_series(
    tree: &mut LazyTree,
    lambda: f64,
    mu: f64,
    n_max: usize,
    use_tilde: bool,
    budget: usize,
) -> Result<SeriesReport> {
    let sums = generation_zeta_sums(tree, mu, n_max, use_tilde, budget)?;
    let first = usize::from(use_tilde);
    let terms: Vec<(usize, f64)> = (first..=n_max).map(|n| (n, (2.0 * lambda).powi(n as i32) * sums[n])).collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, &(_, t)| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let ratios = terms.windows(2).map(|w| w[1].1 / w[0].1).collect();
    Ok(SeriesReport { terms, partial_sums, ratios, warn: lambda >= 0.5 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FastBound {
    pub raw: f64,
    pub value: f64,
    pub vacuous: bool,
}

/// `1 − 2b_N(eℓ(4ℓλ)^N + e^{−N(C−1)²/(2C)})`, clamped to `[0, 1]`.
pub fn overall_fast_bound(b_n: f64, n: usize, c: f64, lambda: f64, ell: f64) -> Result<FastBound> {
    if !(ell > 0.0) || !(lambda > 0.0 && lambda < 1.0 / (4.0 * ell)) {
        return Err(invalid("need 0 < λ < 1/(4ℓ)"));
    }
    if !(c > 1.0) || n < 2 {
        return Err(invalid("need C > 1 and N ≥ 2"));
    }
    let nf = n as f64;
    let raw = 1.0
        - 2.0
            * b_n
            * (std::f64::consts::E * ell * (4.0 * ell * lambda).powf(nf) + (-nf * (c - 1.0).powi(2) / (2.0 * c)).exp());
    Ok(FastBound { raw, value: raw.clamp(0.0, 1.0), vacuous: raw <= 0.0 })
}

/// Root of `1/α − 1 + ln α = −ln(2λ)` in `(0, 1)`.
pub fn alpha_star(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(invalid("alpha_star needs 0 < λ < 1/2"));
    }
    let target = -(2.0 * lambda).ln();
    let h = |a: f64| 1.0 / a - 1.0 + a.ln() - target;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Frequency with which a max-penalty BRW from one particle at `start` dies
/// before time `CN` without reaching graph distance `N`, with its standard error.
pub fn containment_frequency(
    g: &MultiGraph,
    start: usize,
    lambda: f64,
    mu: f64,
    n: usize,
    c: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if start >= g.n() {
        return Err(Error::VertexOutOfRange(start));
    }
    let dist = g.bfs_distances(start);
    let table = RateTable::build(g, &PenaltySpec::max(mu, lambda), true);
    let mut x0 = vec![0u64; g.n()];
    x0[start] = 1;
    let opts = BrwOptions { horizon: c * n as f64, trace: true, ..Default::default() };
    let hits = (0..reps)
        .into_par_iter()
        .map(|i| {
            let run = simulate_brw_table(&table, &x0, &opts, &mut substream(seed, &[i as u64]))?;
            let died = !run.report.censored && !run.report.certified;
            let far = run.trace.iter().any(|e| e.kind == EventKind::Birth && dist[e.vertex as usize] >= n);
            Ok(usize::from(died && !far))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(proportion(hits, reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_sst, sample_gw_tree, DegreePmf};
    use crate::rng::rng_from_seed;
    use crate::stats::Summary;

    #[test]
    fn zeta_on_sst_and_half_line() {
        let mut t = build_sst(&[2, 3], 3).unwrap();
        let c = t.expand(t.root()).start;
        let (_, zt) = zeta_weights(&t, c, 0.7);
        assert!((zt.unwrap() - 2f64.powf(-0.7)).abs() < 1e-15);
        let mut line = build_sst(&[1], 6).unwrap();
        line.expand_to(6, 100).unwrap();
        let u = line.generation(5, 100).unwrap()[0];
        let (z, _) = zeta_weights(&line, u, 0.6);
        assert!((z - 2f64.powf(-0.6 * 5.0)).abs() < 1e-14);
        assert_eq!(zeta_weights(&line, line.root(), 0.6), (1.0, None));
    }

    #[test]
    fn half_line_series_is_geometric() {
        let mut line = build_sst(&[1], 12).unwrap();
        let rep = extinction_series(&mut line, 0.25, 1.0, 12, false, 1000).unwrap();
        for (n, t) in &rep.terms {
            assert!((t - 0.25f64.powi(*n as i32)).abs() < 1e-15);
        }
        assert!(rep.ratios.iter().all(|r| (r - 0.25).abs() < 1e-12));
        assert!(rep.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        let zero = extinction_series(&mut line, 0.0, 1.0, 5, false, 1000).unwrap();
        assert_eq!(*zero.partial_sums.last().unwrap(), 1.0);
    }

    #[test]
    fn zeta_never_exceeds_tilde() {
        let pmf = DegreePmf::binomial(4, 0.6).unwrap();
        let mut rng = rng_from_seed(9);
        for _ in 0..200 {
            let mut t = sample_gw_tree(&pmf, 5, &mut rng);
            t.expand_to(5, 100_000).unwrap();
            for v in 1..t.len() {
                let (z, zt) = zeta_weights(&t, v, 0.8);
                assert!(z <= zt.unwrap() + 1e-15);
            }
        }
    }

    #[test]
    fn tilde_generation_mean_is_moment_power() {
        let pmf = DegreePmf::binomial(4, 0.5).unwrap();
        let mu = 0.5;
        let moment = pmf.expect(|d| (d as f64).powf(1.0 - mu));
        let mut rng = rng_from_seed(10);
        let samples: Vec<f64> = (0..20_000)
            .map(|_| {
                let mut t = sample_gw_tree(&pmf, 3, &mut rng);
                generation_zeta_sums(&mut t, mu, 3, true, 1_000_000).unwrap()[3]
            })
            .collect();
        let s = Summary::of(&samples);
        assert!((s.mean - moment.powi(3)).abs() < 3.5 * s.se, "{} vs {}", s.mean, moment.powi(3));
    }

    #[test]
    fn fast_bound_values() {
        let b = overall_fast_bound(4.0, 2, 3.0, 0.1, 1.0).unwrap();
        assert!(b.raw < 0.0 && b.vacuous && b.value == 0.0);
        let tiny = overall_fast_bound(4.0, 30, 3.0, 1e-9, 1.0).unwrap();
        let limit = 1.0 - 8.0 * (-30.0 * 4.0 / 6.0f64).exp();
        assert!((tiny.raw - limit).abs() < 1e-9);
        assert!(overall_fast_bound(4.0, 2, 3.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn alpha_star_values() {
        let a = alpha_star(1.0 / (2.0 * std::f64::consts::E)).unwrap();
        assert!((1.0 / a - 1.0 + a.ln() - 1.0).abs() < 1e-9);
        assert!((a - 0.3178).abs() < 1e-3);
        let v: Vec<f64> = [0.1, 0.2, 0.4].iter().map(|&l| alpha_star(l).unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2]);
        assert!(alpha_star(0.5 - 1e-9).unwrap() > 0.99);
        assert!(alpha_star(0.5).is_err());
    }
}
