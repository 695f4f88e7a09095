//! Runs an experiment config file into an output directory, the same as
//! `degpen sweep <config> --out <dir>`.
//!
//! cargo run --release --example run_config -- <config.toml> <out-dir>
//!
//! A minimal config:
//!
//! ```toml
//! schema = 1
//! scenario = "extinction_scaling"
//! seed = 1
//! reps = 20
//!
//! [graph]
//! pmf = { family = "power_law", tau = 3.6 }
//!
//! [penalty]
//! kind = "max"
//!
//! [grid]
//! n = [500, 1000, 2000, 4000, 8000]
//! mu = [0.75]
//! lambda = [0.05]
//! ```

use std::path::PathBuf;

use degpen::experiments::{run_experiment, ExperimentConfig};

fn main() -> degpen::Result<()> {
    let mut args = std::env::args().skip(1);
    let (Some(config), Some(out)) = (args.next(), args.next()) else {
        eprintln!("usage: run_config <config.toml> <out-dir>");
        std::process::exit(2);
    };
    let cfg = ExperimentConfig::from_path(&PathBuf::from(config))?;
    let res = run_experiment(&cfg, Some(&PathBuf::from(out)))?;
    for p in &res.summary.points {
        let cols: Vec<String> = p.metrics.iter().map(|(k, m)| format!("{k}={:.4}", m.median)).collect();
        println!("{} {:?} {}", p.penalty, p.coords, cols.join(" "));
    }
    for g in &res.summary.scaling {
        if let Some(f) = &g.fit {
            println!("{} {:?}: {:?}", g.penalty, g.coords, f.classification);
        }
    }
    if let Some(ok) = res.summary.all_passed {
        println!("all oracles passed: {ok}");
    }
    println!("wrote {}", res.dir.display());
    Ok(())
}
