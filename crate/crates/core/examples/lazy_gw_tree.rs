//! Grows a Galton-Watson tree lazily and compares generation sizes with `m^r`,
//! then estimates a second moment by Monte Carlo.
//!
//! cargo run --release --example lazy_gw_tree

use degpen::graph_core::{sample_gw_tree, DegreePmf};
use degpen::rng::substream;
use degpen::structure::{generation_moment_mc, hk_exponent};

fn main() -> degpen::Result<()> {
    let pmf = DegreePmf::uniform(&[0, 1, 2, 3])?;
    let m = pmf.mean();
    let reps = 2000;
    let depth = 8;
    let mut sums = vec![0.0; depth + 1];
    for i in 0..reps {
        let mut rng = substream(3, &[i]);
        let mut tree = sample_gw_tree(&pmf, depth, &mut rng);
        let sizes = tree.generation_sizes(depth, 1 << 22)?;
        for (s, z) in sums.iter_mut().zip(sizes) {
            *s += z as f64;
        }
    }
    println!("{:>3} {:>10} {:>10}", "r", "mean Z_r", "m^r");
    for (r, s) in sums.iter().enumerate() {
        println!("{r:>3} {:>10.3} {:>10.3}", s / reps as f64, m.powi(r as i32));
    }

    let est = generation_moment_mc(&pmf, 4, 2, 20_000, 1 << 20, &mut substream(3, &[u64::MAX]))?;
    println!("E[Z_4^2] ~ {:.2} +- {:.2}", est.mean, est.se);
    for k in 1..=5 {
        println!("h_{k}(tau'=3.5) = {:.3}", hk_exponent(k, 3.5)?);
    }
    Ok(())
}
