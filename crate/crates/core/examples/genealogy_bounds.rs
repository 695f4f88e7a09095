//! Path weights against genealogic BRW counts on a 4-vertex path, the backtracking
//! bounds on small graphs, and the extinction series on a Galton-Watson tree.
//!
//! cargo run --release --example genealogy_bounds -- [reps]

use degpen::dynamics::{simulate_gbrw, GbrwOptions, LabelTrie, PenaltySpec};
use degpen::genealogy::{expected_occupancy, extinction_series, verify_backtrack_bounds, z_weight, PathLabel};
use degpen::graph_core::{sample_gw_tree, DegreePmf, MultiGraph};
use degpen::rng::substream;

fn main() -> degpen::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let g = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
    let p = PenaltySpec::max(1.0, 0.8);
    let x0 = vec![1, 0, 0, 0];
    let labels = [vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 1, 0], vec![0, 1, 2, 3]];

    let mut trie = LabelTrie::new();
    let opts = GbrwOptions { horizon: 50.0, snapshot_times: vec![1.0], ..GbrwOptions::default() };
    let mut z_sum = vec![0u64; labels.len()];
    let mut y_sum = vec![0u64; labels.len()];
    for i in 0..reps {
        let run = simulate_gbrw(
            &g,
            &p,
            &x0,
            &GbrwOptions { label_seed: i, ..opts.clone() },
            &mut trie,
            &mut substream(9, &[i]),
        )?;
        for (j, l) in labels.iter().enumerate() {
            if let Some(id) = trie.find(l) {
                z_sum[j] += run.z.get(id as usize).copied().unwrap_or(0);
                y_sum[j] += run.label_snapshots[0].iter().filter(|e| e.0 == id).map(|e| e.1).sum::<u64>();
            }
        }
    }
    println!("{:<12} {:>9} {:>9} {:>9} {:>9}", "label", "E[Z] mc", "z(pi)", "E[y_1] mc", "formula");
    for (j, l) in labels.iter().enumerate() {
        let pi = PathLabel::new(&g, l.clone())?;
        println!(
            "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            format!("{l:?}"),
            z_sum[j] as f64 / reps as f64,
            z_weight(&g, &p, &pi, &x0)?,
            y_sum[j] as f64 / reps as f64,
            expected_occupancy(&g, &p, &pi, &x0, 1.0)?,
        );
    }

    let tri = MultiGraph::from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3), (2, 3)]);
    let pi = PathLabel::new(&tri, vec![0, 1, 2, 3])?;
    for k in 1..=2 {
        for r in verify_backtrack_bounds(&tri, &pi, 0.3, 0.75, k)? {
            println!("k={k} {:<28} lhs={:.3e} rhs={:.3e} holds={}", r.case_id, r.lhs, r.rhs, r.holds);
        }
    }

    let pmf = DegreePmf::power_law(2.8, 1, 10_000)?;
    let mut tree = sample_gw_tree(&pmf, 12, &mut substream(9, &[u64::MAX]));
    let s = extinction_series(&mut tree, 0.2, 1.0, 12, false, 1 << 22)?;
    for ((n, t), ps) in s.terms.iter().zip(&s.partial_sums) {
        println!("N={n:>2} term={t:.4e} partial={ps:.4e}");
    }
    Ok(())
}
