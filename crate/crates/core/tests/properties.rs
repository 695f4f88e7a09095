use proptest::prelude::*;
use rand::Rng;

use degpen::dynamics::{
    build_graphical_rep, nesting_violations, run_cp_from_rep, simulate_gbrw, thin_rep, GbrwOptions, LabelTrie, Penalty,
    PenaltySpec,
};
use degpen::experiments::fit_scaling;
use degpen::genealogy::{erase_first, erlang_tail, path_weight, preimages, tau, PathLabel};
use degpen::graph_core::{
    build_configuration_model, hash_transform, size_biased, targeted_attack, DegreePmf, MultiGraph, OddSum, TailClass,
};
use degpen::renorm::{cluster_from_field, peierls_bound, peierls_partial, reachable_from_field, ConeConfig, EdgeField};
use degpen::rng::substream;
use degpen::structure::{jl_fixed_point, k_core, k_core_mask, surplus_count};

fn multigraph() -> impl Strategy<Value = MultiGraph> {
    (1usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |edges| MultiGraph::from_edges(n, edges))
    })
}

fn loopless_multigraph() -> impl Strategy<Value = MultiGraph> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec((0..n, 1..n), 1..2 * n)
            .prop_map(move |e| MultiGraph::from_edges(n, e.into_iter().map(|(u, s)| (u, (u + s) % n))))
    })
}

fn pmf() -> impl Strategy<Value = DegreePmf> {
    prop::collection::btree_map(1usize..60, 0.01f64..1.0, 1..12)
        .prop_map(|m| DegreePmf::from_weights(m.into_iter().collect(), TailClass::Explicit).unwrap())
}

/// A walk of up to `len` steps on `g` chosen by `picks`, loops skipped.
fn walk(g: &MultiGraph, start: usize, picks: &[usize]) -> Vec<usize> {
    let mut w = vec![start % g.n()];
    for &k in picks {
        let last = *w.last().unwrap();
        let nb: Vec<usize> = g.neighbors(last).iter().map(|&(u, _)| u as usize).filter(|&u| u != last).collect();
        if nb.is_empty() {
            break;
        }
        w.push(nb[k % nb.len()]);
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_identity(g in multigraph()) {
        g.check_invariants().unwrap();
        for v in 0..g.n() {
            let off: u32 = (0..g.n()).filter(|&u| u != v).map(|u| g.multiplicity(u, v)).sum();
            prop_assert_eq!(g.degree(v), off as usize + 2 * g.loops(v) as usize);
            for u in 0..g.n() {
                prop_assert_eq!(g.multiplicity(u, v), g.multiplicity(v, u));
            }
        }
    }

    #[test]
    fn configuration_model_keeps_degrees(degs in prop::collection::vec(0usize..8, 1..40), seed in any::<u64>()) {
        let mut rng = substream(seed, &[]);
        let (g, used) = build_configuration_model(&degs, OddSum::AutoFix, &mut rng).unwrap();
        prop_assert_eq!(g.degrees(), &used[..]);
        prop_assert_eq!(used.iter().sum::<usize>() % 2, 0);
    }

    #[test]
    fn pmf_normalised(p in pmf()) {
        let total: f64 = p.support().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(p.values().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn size_biased_dominates(p in pmf()) {
        let sb = size_biased(&p, false).unwrap();
        for &z in p.values() {
            prop_assert!(sb.cdf(z) <= p.cdf(z) + 1e-12);
        }
    }

    #[test]
    fn hash_transform_dominates(tau in 2.1f64..4.0, eta in 0.05f64..0.5) {
        let p = DegreePmf::power_law(tau, 1, 5000).unwrap();
        if let Ok(h) = hash_transform(&p, eta) {
            prop_assert!(h.z_norm < 7.0 / 8.0);
            for &z in p.values() {
                prop_assert!(h.pmf.cdf(z) <= p.cdf(z) + 1e-12);
            }
        }
    }

    #[test]
    fn attack_consistency(g in multigraph(), m in 0usize..10) {
        let att = targeted_attack(&g, m);
        prop_assert_eq!(att.h_le_m + att.h_gt_m, g.degrees().iter().sum::<usize>());
        prop_assert_eq!(att.attacked_degrees().iter().sum::<usize>() % 2, 0);
        for (new, &old) in att.kept.iter().enumerate() {
            prop_assert!(g.degree(old) <= m);
            prop_assert!(att.attacked_degrees()[new] <= g.degree(old));
        }
    }

    #[test]
    fn penalty_at_least_one(mu in 0.0f64..2.0, x in 1usize..500, y in 1usize..500) {
        for p in [Penalty::Product { mu }, Penalty::Max { mu }] {
            prop_assert!(p.f(x as f64, y as f64) >= 1.0);
        }
    }

    #[test]
    fn replay_and_couplings(g in loopless_multigraph(), seed in any::<u64>(), mu in 0.0f64..1.0, lambda in 0.1f64..3.0) {
        let mut rng = substream(seed, &[]);
        let (max, product) = (PenaltySpec::max(mu, lambda), PenaltySpec::product(mu, lambda));
        let rep = build_graphical_rep(&g, &max, 4.0, &mut rng).unwrap();
        let outer: Vec<usize> = (0..g.n()).filter(|_| rng.random_bool(0.6)).collect();
        prop_assume!(!outer.is_empty());
        let inner: Vec<usize> = outer.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let big = run_cp_from_rep(&rep, &outer).unwrap();
        let again = run_cp_from_rep(&rep, &outer).unwrap();
        prop_assert_eq!(big.final_state(), again.final_state());
        prop_assert_eq!(big.extinction_time(), again.extinction_time());
        if !inner.is_empty() {
            prop_assert_eq!(nesting_violations(&run_cp_from_rep(&rep, &inner).unwrap(), &big), 0);
        }
        // (xy)^μ ≥ max(x,y)^μ, so the product rates thin the max rates
        let thinned = thin_rep(&rep, &g, &max, &product, &mut rng).unwrap();
        prop_assert_eq!(nesting_violations(&run_cp_from_rep(&thinned, &outer).unwrap(), &big), 0);
    }

    #[test]
    fn gbrw_projection(g in loopless_multigraph(), seed in any::<u64>()) {
        let p = PenaltySpec::product(0.5, 0.9);
        let x0: Vec<u64> = (0..g.n()).map(|v| (v % 2) as u64 + 1).collect();
        let opts = GbrwOptions { horizon: 3.0, snapshot_times: vec![0.5, 1.5, 2.9], label_seed: seed, ..GbrwOptions::default() };
        let mut trie = LabelTrie::new();
        let run = simulate_gbrw(&g, &p, &x0, &opts, &mut trie, &mut substream(seed, &[1])).unwrap();
        for (labels, x) in run.label_snapshots.iter().zip(&run.vertex_snapshots) {
            let mut proj = vec![0u64; g.n()];
            for &(l, c) in labels {
                proj[trie.end(l)] += c;
            }
            prop_assert_eq!(&proj, x);
        }
    }

    #[test]
    fn erasure_shape(g in loopless_multigraph(), start in 0usize..8, picks in prop::collection::vec(0usize..6, 2..9)) {
        let pi = PathLabel::new(&g, walk(&g, start, &picks)).unwrap();
        if let Some(t) = tau(&pi) {
            let e = erase_first(&pi).unwrap();
            prop_assert_eq!(e.len() + 2, pi.len());
            prop_assert_eq!(e.start(), pi.start());
            prop_assert_eq!(e.end(), pi.end());
            if let Some(t2) = tau(&e) {
                prop_assert!(t2 + 1 >= t);
            }
            // the erased back-and-forth step carries weight r(u,w)·r(w,u)
            let v = pi.vertices();
            let pen = PenaltySpec::max(0.75, 0.6);
            let r = |a: usize, b: usize| pen.rate(g.multiplicity(a, b), g.degree(a), g.degree(b));
            let lhs = path_weight(&g, &pen, &e) * r(v[t - 2], v[t - 1]) * r(v[t - 1], v[t]);
            let rhs = path_weight(&g, &pen, &pi);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn preimage_count_on_trees(n in 2usize..7, start in 0usize..7, picks in prop::collection::vec(0usize..4, 0..4), k in 1usize..3) {
        // a path graph is a tree without extra edges
        let g = MultiGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1)));
        let pi = PathLabel::new(&g, walk(&g, start, &picks)).unwrap();
        let pre = preimages(&g, &pi, k, 1_000_000).unwrap();
        let ell = pi.len();
        let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
        let max_deg = (0..n).map(|v| g.degree(v)).max().unwrap();
        prop_assert!(pre.len() <= binom(ell + 2 * k, k) * max_deg.pow(k as u32));
        for q in &pre {
            prop_assert_eq!(q.len(), ell + 2 * k);
        }
    }

    #[test]
    fn erlang_tail_monotone(m in 0usize..20, t in 0.0f64..30.0, dt in 0.0f64..5.0) {
        prop_assert!(erlang_tail(m, t + dt) <= erlang_tail(m, t) + 1e-15);
        prop_assert!(erlang_tail(m + 1, t) >= erlang_tail(m, t) - 1e-15);
        prop_assert_eq!(erlang_tail(m + 1, 0.0), 1.0);
    }

    #[test]
    fn k_core_idempotent_and_nested(g in multigraph(), k in 1usize..5) {
        let (core, kept) = k_core(&g, k);
        let (again, _) = k_core(&core, k);
        prop_assert_eq!(again.n(), core.n());
        prop_assert!((0..core.n()).all(|v| core.degree(v) >= k));
        let outer = k_core_mask(&g, k);
        let inner = k_core_mask(&g, k + 1);
        prop_assert!(inner.iter().zip(&outer).all(|(&i, &o)| !i || o));
        prop_assert_eq!(kept.len(), outer.iter().filter(|&&b| b).count());
    }

    #[test]
    fn jl_root_solves_equation(n in 5usize..15, p in 0.2f64..0.9, k in 2usize..4) {
        let pmf = DegreePmf::binomial(n, p).unwrap();
        let fp = jl_fixed_point(&pmf, k, 4000).unwrap();
        prop_assert!((0.0..=1.0).contains(&fp.p_hat));
        prop_assert!(fp.residual.abs() <= 1e-10);
    }

    #[test]
    fn surplus_matches_ball_count(g in multigraph(), v in 0usize..12, r in 0usize..4) {
        let v = v % g.n();
        let dist = g.bfs_distances(v);
        let inside = |u: usize| dist[u] <= r;
        let verts = (0..g.n()).filter(|&u| inside(u)).count();
        let edges: usize = g.edges().filter(|&(a, b, _)| inside(a) && inside(b)).map(|(_, _, m)| m as usize).sum();
        // the ball is connected through v
        prop_assert_eq!(surplus_count(&g, v, r).unwrap(), edges + 1 - verts);
    }

    #[test]
    fn cluster_is_reachability(delta in 0.0f64..1.0, depth in 1usize..40, seed in any::<u64>()) {
        let cfg = ConeConfig::new(delta, depth).unwrap();
        let field = EdgeField::sample(&cfg, &mut substream(seed, &[]));
        let reach: Vec<_> = reachable_from_field(&field).into_iter().filter(|&(_, y)| y <= depth).collect();
        prop_assert_eq!(cluster_from_field(&field).sites(), reach);
    }

    #[test]
    fn opening_edges_grows_cluster(delta in 0.0f64..1.0, depth in 1usize..40, seed in any::<u64>()) {
        let cfg = ConeConfig::new(delta, depth).unwrap();
        let a = EdgeField::sample(&cfg, &mut substream(seed, &[0]));
        let b = EdgeField::sample(&cfg, &mut substream(seed, &[1]));
        let small = cluster_from_field(&a);
        let big = cluster_from_field(&a.union(&b));
        prop_assert!(small.sites().iter().all(|&(x, y)| big.contains(x, y)));
    }

    #[test]
    fn peierls_partial_sums_converge(delta in 0.0f64..7e-4) {
        // 3δ^{1/4} ≤ 1/2 here, so 200 terms leave a remainder far below 1e-12
        let full = peierls_bound(delta).unwrap();
        let tail = peierls_partial(delta, 200);
        prop_assert!((full - tail).abs() <= 1e-12);
    }

    #[test]
    fn fit_is_scale_invariant(a in 0.5f64..5.0, b in 0.1f64..3.0, c in 0.1f64..100.0, shape in 0usize..3) {
        let ns = [500.0, 1000.0, 2000.0, 4000.0, 8000.0];
        let series: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n: &f64| {
                let t = match shape {
                    0 => a + b * n.ln(),
                    1 => a * n.powf(0.2 + b / 3.0),
                    _ => a * (b * n / 1000.0).exp(),
                };
                (n, t)
            })
            .collect();
        let fit = fit_scaling(&series).unwrap();
        for m in [Some(&fit.logarithmic), fit.polynomial.as_ref(), fit.exponential.as_ref()].into_iter().flatten() {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&m.r2));
        }
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(n, t)| (n, c * t)).collect();
        prop_assert_eq!(fit_scaling(&scaled).unwrap().classification, fit.classification);
    }
}
