//! Growth classification of synthetic and simulated extinction-time series.
//!
//! cargo run --release --example scaling_fit

use rand_distr::{Distribution, Normal};

use degpen::experiments::{fit_scaling, phase_table, ExperimentConfig};
use degpen::rng::substream;

fn show(name: &str, s: &[(f64, f64)]) -> degpen::Result<()> {
    let f = fit_scaling(s)?;
    println!(
        "{name:<14} -> {:?} (best {:?}, runner-up {:?}, gap {:.4}, R2 log {:.4})",
        f.classification, f.best, f.runner_up, f.gap, f.logarithmic.r2
    );
    Ok(())
}

fn main() -> degpen::Result<()> {
    let ns = [500.0, 1000.0, 2000.0, 4000.0, 8000.0];
    let noise = Normal::new(0.0, 0.1).expect("valid sd");
    let mut rng = substream(29, &[]);
    show("2 ln n + noise", &ns.map(|n: f64| (n, 2.0 * n.ln() + noise.sample(&mut rng))))?;
    show("0.5 sqrt(n)", &ns.map(|n: f64| (n, 0.5 * n.sqrt())))?;
    show("constant", &ns.map(|n| (n, 3.0)))?;
    show("e^{0.1 n}", &(1..=8).map(|i| (10.0 * i as f64, (i as f64).exp())).collect::<Vec<_>>())?;

    let cfg = ExperimentConfig::from_toml(
        r#"
schema = 1
scenario = "phase_sweep"
seed = 29
reps = 15
[graph]
pmf = { family = "power_law", tau = 3.6 }
[penalty]
kind = ["product", "max"]
[grid]
n = [250, 500, 1000, 2000]
mu = [1.0]
lambda = [0.0, 0.5]
"#,
    )?;
    for cell in phase_table(&cfg)? {
        println!(
            "{:<8} {:?} growth={:?} ratio={:.2} -> {:?}",
            cell.penalty, cell.coords, cell.growth, cell.ratio, cell.verdict
        );
    }
    Ok(())
}
