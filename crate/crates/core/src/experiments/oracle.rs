use rand::Rng;
use serde::Serialize;

use super::fit::{fit_scaling, Growth};
use crate::dynamics::{
    build_graphical_rep, nesting_violations, run_cp_from_rep, simulate_cp, two_state_occupation, CpOptions, PenaltySpec,
};
use crate::error::Error;
use crate::genealogy::{erlang_tail, verify_backtrack_bounds, PathLabel};
use crate::graph_core::{
    build_configuration_model, build_star, sample_degree_sequence, size_biased, targeted_attack, DegreePmf, MultiGraph,
    OddSum,
};
use crate::renorm::{
    cluster_from_field, peierls_bound, reachable_from_field, survival_estimate, ConeConfig, EdgeField,
};
use crate::rng::{derive_seed, substream, SimRng};
use crate::stats::Summary;
use crate::structure::{jl_fixed_point, k_core_mask, surplus_count};

/// Result of one self-check: `passed` iff `value` is within `bound` in the sense the
/// check documents (usually `value ≤ bound`).
#[derive(Debug, Clone, Serialize)]
pub struct OracleOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

fn at_most(
    module: &'static str,
    name: &'static str,
    value: f64,
    bound: f64,
    detail: impl Into<String>,
) -> OracleOutcome {
    OracleOutcome { module, name, passed: value <= bound, value, bound, detail: detail.into() }
}

fn failed(module: &'static str, name: &'static str, e: Error) -> OracleOutcome {
    OracleOutcome { module, name, passed: false, value: f64::NAN, bound: f64::NAN, detail: e.to_string() }
}

type Check = fn(&mut SimRng) -> OracleOutcome;

const CHECKS: &[Check] = &[
    cm_keeps_degrees,
    size_biased_mean,
    attacked_degree_law,
    star_extinction_bound,
    graphical_monotonicity,
    two_state_stationary,
    backtrack_bounds,
    erlang_tail_quadrature,
    regular_core_is_whole,
    jl_core_density,
    surplus_units,
    peierls_value,
    recursion_is_reachability,
    op_survival,
    fit_synthetic,
];

/// Runs every built-in Monte Carlo and exact self-check. Each check owns a substream
/// of `seed`; the whole suite takes seconds in release builds.
pub fn oracle_suite(seed: u64) -> Vec<OracleOutcome> {
    CHECKS.iter().enumerate().map(|(i, c)| c(&mut substream(derive_seed(seed, &[0x0ac1e]), &[i as u64]))).collect()
}

fn cm_keeps_degrees(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<f64> {
        let pmf = DegreePmf::power_law(2.5, 1, 5000)?;
        let degs = sample_degree_sequence(&pmf, 5000, rng);
        let (g, used) = build_configuration_model(&degs, OddSum::AutoFix, rng)?;
        Ok(used.iter().zip(g.degrees()).filter(|(a, b)| a != b).count() as f64)
    };
    match run() {
        Ok(v) => at_most("graph_core", "configuration_model_degrees", v, 0.0, "vertices whose degree changed"),
        Err(e) => failed("graph_core", "configuration_model_degrees", e),
    }
}

fn size_biased_mean(_: &mut SimRng) -> OracleOutcome {
    let run = || -> crate::Result<f64> {
        let pmf = DegreePmf::power_law(3.5, 1, 200)?;
        let sb = size_biased(&pmf, false)?;
        let direct = pmf.expect(|d| (d * d) as f64) / pmf.mean();
        Ok((sb.mean() - direct).abs())
    };
    match run() {
        Ok(v) => at_most("graph_core", "size_biased_mean", v, 1e-9, "|E_sb[D] - E[D^2]/E[D]|"),
        Err(e) => failed("graph_core", "size_biased_mean", e),
    }
}

fn attacked_degree_law(rng: &mut SimRng) -> OracleOutcome {
    // Compared with the finite-n law: each surviving vertex of degree d keeps
    // Bin(d, q̂) half-edges, q̂ the realised fraction of half-edges at survivors.
    // The limiting p_M differs from it by the fluctuation of q̂, which is large
    // for infinite-variance degrees.
    let mut run = || -> crate::Result<f64> {
        let (n, m) = (20_000, 30);
        let pmf = DegreePmf::power_law(2.5, 1, n)?;
        let (g, _) = build_configuration_model(&sample_degree_sequence(&pmf, n, rng), OddSum::AutoFix, rng)?;
        let att = targeted_attack(&g, m);
        let emp = att.empirical_pmf().ok_or_else(|| Error::InvalidInput("attack removed everything".into()))?;
        let q_hat = att.h_le_m as f64 / (att.h_le_m + att.h_gt_m) as f64;
        let small: Vec<usize> = g.degrees().iter().copied().filter(|&d| d <= m).collect();
        let mut mix = vec![0.0; m + 1];
        for (d, w) in DegreePmf::empirical(&small)?.support() {
            let b = DegreePmf::binomial(d, q_hat)?;
            for (i, slot) in mix.iter_mut().enumerate().take(d + 1) {
                *slot += w * b.prob(i);
            }
        }
        Ok(mix.iter().enumerate().map(|(i, p)| (emp.prob(i) - p).abs()).fold(0.0, f64::max))
    };
    match run() {
        Ok(v) => at_most(
            "graph_core",
            "attacked_degree_law",
            v,
            0.01,
            "sup |empirical - Bin(d, q_hat) mixture|, n = 2e4, M = 30",
        ),
        Err(e) => failed("graph_core", "attacked_degree_law", e),
    }
}

fn star_extinction_bound(rng: &mut SimRng) -> OracleOutcome {
    let (k, mu, lambda) = (20usize, 0.6, 0.5);
    let mut run = || -> crate::Result<(f64, f64)> {
        let g = build_star(k)?;
        let p = PenaltySpec::product(mu, lambda);
        let xi0: Vec<usize> = (0..=k).collect();
        let opts = CpOptions::with_horizon(1e6);
        let ts = (0..5000)
            .map(|_| simulate_cp(&g, &p, &xi0, &opts, rng).map(|r| r.report.t_ext))
            .collect::<crate::Result<Vec<_>>>()?;
        let s = Summary::of(&ts);
        let bound = ((k as f64).powf(1.0 - mu) + k as f64) / (1.0 - lambda);
        Ok((s.mean - 3.0 * s.se, bound))
    };
    match run() {
        Ok((v, b)) => at_most("dynamics", "star_extinction_bound", v, b, "mean T_ext - 3se vs sum d^(1-mu)/(1-lambda)"),
        Err(e) => failed("dynamics", "star_extinction_bound", e),
    }
}

fn random_small_graph(rng: &mut SimRng, n: usize, edges: usize) -> MultiGraph {
    let pairs: Vec<(usize, usize)> = (0..edges)
        .map(|_| {
            let u = rng.random_range(0..n);
            let v = (u + rng.random_range(1..n)) % n;
            (u, v)
        })
        .collect();
    MultiGraph::from_edges(n, pairs)
}

fn graphical_monotonicity(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<f64> {
        let p = PenaltySpec::product(0.5, 1.5);
        let mut bad = 0;
        for _ in 0..100 {
            let g = random_small_graph(rng, 30, 60);
            let rep = build_graphical_rep(&g, &p, 5.0, rng)?;
            let outer: Vec<usize> = (0..30).filter(|_| rng.random_bool(0.5)).collect();
            let inner: Vec<usize> = outer.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            bad += nesting_violations(&run_cp_from_rep(&rep, &inner)?, &run_cp_from_rep(&rep, &outer)?);
        }
        Ok(bad as f64)
    };
    match run() {
        Ok(v) => at_most("dynamics", "graphical_monotonicity", v, 0.0, "nesting violations over 100 runs"),
        Err(e) => failed("dynamics", "graphical_monotonicity", e),
    }
}

fn two_state_stationary(rng: &mut SimRng) -> OracleOutcome {
    match two_state_occupation(1.0, 3.0, 2e4, rng) {
        Ok(f) => at_most("dynamics", "two_state_occupation", (f - 0.25).abs(), 0.02, "|occupation - q01/(q01+q10)|"),
        Err(e) => failed("dynamics", "two_state_occupation", e),
    }
}

fn walks(g: &MultiGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..g.n()).map(|v| vec![v]).collect();
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let next: Vec<Vec<usize>> = frontier
            .iter()
            .flat_map(|w| {
                let last = *w.last().expect("nonempty walk");
                g.neighbors(last).iter().filter(move |&&(u, _)| u as usize != last).map(move |&(u, _)| {
                    let mut w2 = w.clone();
                    w2.push(u as usize);
                    w2
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn backtrack_bounds(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<(f64, usize)> {
        let (mut bad, mut cases) = (0usize, 0usize);
        for _ in 0..20 {
            let n = rng.random_range(2..=6);
            let g = random_small_graph(rng, n, n + 2);
            for w in walks(&g, 3) {
                let pi = PathLabel::new(&g, w)?;
                for mu in [0.5, 0.75, 1.0] {
                    for k in 1..=2 {
                        match verify_backtrack_bounds(&g, &pi, 0.3, mu, k) {
                            Ok(reps) => {
                                cases += reps.len();
                                bad += reps.iter().filter(|r| !r.holds).count();
                            }
                            Err(Error::EnumerationCap(_)) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Ok((bad as f64, cases))
    };
    match run() {
        Ok((v, cases)) => {
            at_most("genealogy", "backtrack_bounds", v, 0.0, format!("violations over {cases} bound checks"))
        }
        Err(e) => failed("genealogy", "backtrack_bounds", e),
    }
}

fn erlang_tail_quadrature(_: &mut SimRng) -> OracleOutcome {
    // P(Gamma(m,1) > t) against 1 − ∫₀ᵗ x^{m−1}e^{−x}/(m−1)! dx by Simpson's rule.
    let mut worst: f64 = 0.0;
    for m in 1..=6usize {
        let fact: f64 = (1..m).map(|j| j as f64).product();
        for &t in &[0.3, 1.0, 2.5, 6.0] {
            let f = |x: f64| x.powi(m as i32 - 1) * (-x).exp() / fact;
            let steps = 2000;
            let h = t / steps as f64;
            let s: f64 = (0..=steps)
                .map(|i| {
                    let w = if i == 0 || i == steps {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * f(i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0;
            worst = worst.max((erlang_tail(m, t) - (1.0 - s)).abs());
        }
    }
    at_most("genealogy", "erlang_tail", worst, 1e-9, "max |closed form - quadrature|")
}

fn regular_core_is_whole(rng: &mut SimRng) -> OracleOutcome {
    match build_configuration_model(&vec![4; 1000], OddSum::Reject, rng) {
        Ok((g, _)) => {
            let missing = k_core_mask(&g, 3).iter().filter(|&&b| !b).count();
            at_most(
                "structure",
                "regular_core_is_whole",
                missing as f64,
                0.0,
                "vertices pruned from a 4-regular 3-core",
            )
        }
        Err(e) => failed("structure", "regular_core_is_whole", e),
    }
}

fn jl_core_density(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<f64> {
        let pmf = DegreePmf::binomial(10, 0.5)?;
        let fp = jl_fixed_point(&pmf, 3, 4000)?;
        let n = 20_000;
        let (g, _) = build_configuration_model(&sample_degree_sequence(&pmf, n, rng), OddSum::AutoFix, rng)?;
        let core = k_core_mask(&g, 3).iter().filter(|&&b| b).count() as f64 / n as f64;
        Ok((core - fp.vertex_density).abs())
    };
    match run() {
        Ok(v) => at_most("structure", "jl_core_density", v, 0.02, "|MC 3-core density - h1(D, p)|, D = Bin(10, 0.5)"),
        Err(e) => failed("structure", "jl_core_density", e),
    }
}

fn surplus_units(_: &mut SimRng) -> OracleOutcome {
    let tri = MultiGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
    let path = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
    match (surplus_count(&tri, 0, 2), surplus_count(&path, 1, 3)) {
        (Ok(a), Ok(b)) => {
            let err = (a as f64 - 1.0).abs() + b as f64;
            at_most("structure", "surplus_units", err, 0.0, format!("triangle {a}, path {b}"))
        }
        (Err(e), _) | (_, Err(e)) => failed("structure", "surplus_units", e),
    }
}

fn peierls_value(_: &mut SimRng) -> OracleOutcome {
    match peierls_bound((1.0f64 / 15.0).powi(4)) {
        Ok(b) => at_most("renorm", "peierls_bound", (b - 0.25).abs(), 1e-12, "|bound at (1/15)^4 - 1/4|"),
        Err(e) => failed("renorm", "peierls_bound", e),
    }
}

fn recursion_is_reachability(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<f64> {
        let cfg = ConeConfig::new(0.3, 30)?;
        let mut bad = 0;
        for _ in 0..200 {
            let field = EdgeField::sample(&cfg, rng);
            let c = cluster_from_field(&field);
            let reach: Vec<_> = reachable_from_field(&field).into_iter().filter(|&(_, y)| y <= 30).collect();
            bad += usize::from(c.sites() != reach);
        }
        Ok(bad as f64)
    };
    match run() {
        Ok(v) => at_most("renorm", "recursion_is_reachability", v, 0.0, "mismatching fields out of 200"),
        Err(e) => failed("renorm", "recursion_is_reachability", e),
    }
}

fn op_survival(rng: &mut SimRng) -> OracleOutcome {
    let mut run = || -> crate::Result<(f64, f64)> {
        let est = survival_estimate(&ConeConfig::new((1.0f64 / 15.0).powi(4), 100)?, 2000, rng.random())?;
        Ok((0.75 - 3.0 * est.se, est.survival))
    };
    match run() {
        // passes when survival ≥ 0.75 − 3σ, i.e. the threshold is at most the estimate
        Ok((thr, s)) => at_most("renorm", "op_survival", thr, s, format!("survival {s} at delta = (1/15)^4")),
        Err(e) => failed("renorm", "op_survival", e),
    }
}

fn fit_synthetic(rng: &mut SimRng) -> OracleOutcome {
    let ns = [500.0, 1000.0, 2000.0, 4000.0, 8000.0];
    let noisy: Vec<(f64, f64)> =
        ns.iter().map(|&n| (n, 2.0 * f64::ln(n) + 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal))).collect();
    let exp: Vec<(f64, f64)> = (1..=8).map(|i| (10.0 * i as f64, f64::exp(i as f64))).collect();
    let ok = |s: &[(f64, f64)], g: Growth| fit_scaling(s).is_ok_and(|f| f.classification == g);
    let wrong = usize::from(!ok(&noisy, Growth::Logarithmic)) + usize::from(!ok(&exp, Growth::Exponential));
    at_most("experiments", "fit_synthetic", wrong as f64, 0.0, "misclassified synthetic series")
}
