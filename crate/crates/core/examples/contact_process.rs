//! Contact process on a configuration model, all vertices infected at time 0,
//! for both penalties at a few sizes.
//!
//! cargo run --release --example contact_process -- [reps]

use degpen::dynamics::{simulate_cp, CpOptions, PenaltySpec};
use degpen::graph_core::{build_configuration_model, sample_degree_sequence, DegreePmf, OddSum};
use degpen::rng::substream;
use degpen::stats::median;

fn main() -> degpen::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cases = [("product", PenaltySpec::product(1.0, 0.5)), ("max", PenaltySpec::max(0.75, 0.05))];
    for (name, p) in cases {
        for n in [500usize, 1000, 2000, 4000] {
            let horizon = 1e3 * (n as f64).ln();
            let pmf = DegreePmf::power_law(3.6, 1, n)?;
            let mut times = Vec::new();
            let mut events = 0;
            for i in 0..reps {
                let mut rng = substream(11, &[n as u64, i]);
                let (g, _) =
                    build_configuration_model(&sample_degree_sequence(&pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
                let xi0: Vec<usize> = (0..n).collect();
                let r = simulate_cp(&g, &p, &xi0, &CpOptions::with_horizon(horizon), &mut rng)?.report;
                events += r.events.heals + r.events.infections;
                times.push(r.t_ext);
            }
            println!("{name:>7} n={n:>5} median T_ext={:>8.3} events/run={}", median(&times), events / reps);
        }
    }
    Ok(())
}
