//! Couplings built on one graphical representation: monotonicity in the initial set,
//! thinning from the max penalty down to the product penalty, and the token coupling
//! of the contact process under the branching random walk.
//!
//! cargo run --release --example graphical_coupling

use rand::Rng;

use degpen::dynamics::{
    build_graphical_rep, nesting_violations, run_cp_from_rep, simulate_coupled_cp_brw, thin_rep, PenaltySpec,
    DEFAULT_CAP,
};
use degpen::graph_core::{build_configuration_model, sample_degree_sequence, DegreePmf, OddSum};
use degpen::rng::substream;

fn main() -> degpen::Result<()> {
    let pmf = DegreePmf::uniform(&[2, 3, 4, 5])?;
    let (mu, lambda) = (0.5, 1.2);
    let (max, product) = (PenaltySpec::max(mu, lambda), PenaltySpec::product(mu, lambda));
    let (mut mono, mut thin, mut token, mut runs) = (0, 0, 0, 0);
    for i in 0..1000u64 {
        let mut rng = substream(5, &[i]);
        let n = rng.random_range(10..60);
        let (g, _) = build_configuration_model(&sample_degree_sequence(&pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
        let outer: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
        if outer.is_empty() {
            continue;
        }
        let inner: Vec<usize> = outer.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        runs += 1;

        let rep = build_graphical_rep(&g, &max, 5.0, &mut rng)?;
        let big = run_cp_from_rep(&rep, &outer)?;
        mono += nesting_violations(&run_cp_from_rep(&rep, &inner)?, &big);
        let thinned = thin_rep(&rep, &g, &max, &product, &mut rng)?;
        thin += nesting_violations(&run_cp_from_rep(&thinned, &outer)?, &big);

        let c = simulate_coupled_cp_brw(&g, &product, &outer, 5.0, &[1.0, 2.0, 5.0], DEFAULT_CAP, &mut rng)?;
        token += c.violations;
    }
    println!("{runs} random (graph, start) pairs");
    println!("monotone in the initial set: {mono} violations");
    println!("product inside max after thinning: {thin} violations");
    println!("CP below BRW under the token coupling: {token} violations");
    Ok(())
}
