//! Samples a configuration model with power-law degrees and prints basic statistics,
//! then the attacked degree law next to its binomial-thinning limit.
//!
//! cargo run --release --example configuration_model -- [n] [tau]

use degpen::graph_core::{
    binomial_thinning_pmf, build_configuration_model, sample_degree_sequence, targeted_attack, DegreePmf, OddSum,
};
use degpen::rng::substream;

fn main() -> degpen::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let tau: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2.5);
    let mut rng = substream(7, &[]);

    let pmf = DegreePmf::power_law(tau, 1, n)?;
    let degs = sample_degree_sequence(&pmf, n, &mut rng);
    let (g, _) = build_configuration_model(&degs, OddSum::AutoFix, &mut rng)?;
    let loops: u32 = (0..g.n()).map(|v| g.loops(v)).sum();
    println!(
        "n={} edges={} max_degree={} loops={loops} simple={}",
        g.n(),
        g.edge_count(),
        g.degrees().iter().max().unwrap(),
        g.is_simple()
    );
    println!("E[D]={:.4} components={}", pmf.mean(), g.component_count());

    let m = 30;
    let att = targeted_attack(&g, m);
    let (limit, q) = binomial_thinning_pmf(&pmf, m)?;
    let q_hat = att.h_le_m as f64 / (att.h_le_m + att.h_gt_m) as f64;
    println!("attack M={m}: kept {} vertices, q_M={q:.4} realised={q_hat:.4}", att.v_le_m);
    let emp = att.empirical_pmf().expect("survivors");
    println!("{:>3} {:>9} {:>9}", "i", "empirical", "p_M");
    for i in 0..=8 {
        println!("{i:>3} {:>9.5} {:>9.5}", emp.prob(i), limit.prob(i));
    }
    Ok(())
}
