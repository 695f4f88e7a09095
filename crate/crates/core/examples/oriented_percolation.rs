//! Oriented percolation on the cone: survival against δ in both dependence modes,
//! the Peierls bound, and a contour census of one finite cluster.
//!
//! cargo run --release --example oriented_percolation -- [reps]

use degpen::renorm::{
    cluster_from_field, contour_census, peierls_bound, survival_estimate, write_survival_csv, ConeConfig, Dependence,
    EdgeField,
};
use degpen::rng::substream;

fn main() -> degpen::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let small = (1.0f64 / 15.0).powi(4);
    println!("peierls_bound((1/15)^4) = {}", peierls_bound(small)?);
    for mode in [Dependence::SharedSource, Dependence::Independent] {
        println!("{mode:?}");
        let mut rows = Vec::new();
        for delta in [small, 0.05, 0.1, 0.2, 0.3, 0.4] {
            rows.push(survival_estimate(&ConeConfig::new(delta, 200)?.with_mode(mode), reps, 23)?);
        }
        write_survival_csv(&rows, std::io::stdout())?;
    }

    let cfg = ConeConfig::new(0.45, 60)?;
    for i in 0.. {
        let field = EdgeField::sample(&cfg, &mut substream(23, &[i]));
        let c = cluster_from_field(&field);
        if c.size >= 10 && !c.survives() {
            if let Some(rep) = contour_census(&c, &field) {
                println!("cluster of {} sites: {rep:?}", c.size);
                break;
            }
        }
    }
    Ok(())
}
