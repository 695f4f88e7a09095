//! Breadth-first exploration of configuration-model neighbourhoods: surplus edges in
//! balls of radius `⌊0.2 ln n⌋` and the forward-degree domination coupling.
//!
//! cargo run --release --example exploration -- [n]

use rand::Rng;

use degpen::graph_core::{build_configuration_model, sample_degree_sequence, DegreePmf, OddSum};
use degpen::rng::substream;
use degpen::structure::{explore_graph, explore_neighborhood, surplus_count, surplus_edges_classified, ExploreOptions};

fn main() -> degpen::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let r = (0.2 * (n as f64).ln()).floor() as usize;
    let pmf = DegreePmf::power_law(3.5, 1, n)?;
    let mut rng = substream(19, &[]);
    let degs = sample_degree_sequence(&pmf, n, &mut rng);
    let (g, _) = build_configuration_model(&degs, OddSum::AutoFix, &mut rng)?;

    let mut worst = 0;
    let mut hist = [0usize; 4];
    for _ in 0..100 {
        let v = rng.random_range(0..n);
        let s = surplus_count(&g, v, r)?;
        worst = worst.max(s);
        hist[s.min(3)] += 1;
    }
    println!("n={n} r={r}: surplus 0/1/2/3+ = {hist:?}, max {worst}");

    let out = explore_graph(&g, 0, r + 1, &ExploreOptions::default(), &mut rng)?;
    println!(
        "explore_graph from 0, radius {}: {} vertices, surplus {}, classified {}",
        out.radius,
        out.ball_vertices.len(),
        out.surplus,
        surplus_edges_classified(&out)
    );

    let opts = ExploreOptions { dominate: true, ..ExploreOptions::default() };
    let lazy = explore_neighborhood(&degs, 0, 3, &opts, &mut rng)?;
    println!(
        "lazy exploration with domination: {} steps, {} violations, surplus {}",
        lazy.steps, lazy.domination_violations, lazy.surplus
    );
    Ok(())
}
