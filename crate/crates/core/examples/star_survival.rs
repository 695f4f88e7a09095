//! Star survival times for a sub-critical and a super-critical penalty exponent.
//!
//! cargo run --release --example star_survival -- [reps]

use degpen::dynamics::{star_survival_experiment, PenaltySpec, StarConfig};
use degpen::stats::ols;

fn main() -> degpen::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let ks = [50usize, 100, 200, 400];
    for (mu, lambda) in [(0.25, 1.0), (0.75, 0.5)] {
        println!("mu={mu} lambda={lambda}");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &k in &ks {
            let cfg = StarConfig::new(k, PenaltySpec::product(mu, lambda), reps, 1e8, 2024);
            let out = star_survival_experiment(&cfg)?;
            println!("  K={k:4} median={:>12.3} mean={:>12.3} censored={}", out.median, out.mean, out.censored);
            xs.push((k as f64).sqrt());
            ys.push(out.median.ln());
        }
        let fit = ols(&xs, &ys);
        println!("  ln(median) ~ sqrt(K): slope={:.4} R2={:.4}", fit.slope, fit.r2);
    }
    Ok(())
}
