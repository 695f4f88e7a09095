//! Janson-Łuczak fixed point against the pruned k-core of a configuration model.
//!
//! cargo run --release --example kcore_fixed_point -- [n]

use degpen::graph_core::{build_configuration_model, sample_degree_sequence, DegreePmf, OddSum};
use degpen::rng::substream;
use degpen::structure::{jl_fixed_point, k_core_mask};

fn main() -> degpen::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let cases = [
        (DegreePmf::binomial(10, 0.35)?, "Bin(10,0.35)"),
        (DegreePmf::binomial(10, 0.5)?, "Bin(10,0.5)"),
        (DegreePmf::point(4), "4-regular"),
    ];
    for (pmf, name) in &cases {
        for k in [2usize, 3, 4] {
            let fp = jl_fixed_point(pmf, k, 4000)?;
            let mut rng = substream(13, &[k as u64]);
            let (g, _) =
                build_configuration_model(&sample_degree_sequence(pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
            let core = k_core_mask(&g, k).iter().filter(|&&b| b).count() as f64 / n as f64;
            println!("{name:<13} k={k} p_hat={:.4} predicted={:.4} simulated={core:.4}", fp.p_hat, fp.vertex_density);
        }
    }
    Ok(())
}
