use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::jl::{attack_threshold, jl_fixed_point};
use super::kcore::k_core_mask;
use crate::error::{invalid, Result};
use crate::graph_core::{
    binomial_thinning_pmf, build_configuration_model, sample_degree_sequence, targeted_attack, DegreePmf, OddSum,
};
use crate::rng::substream;
use crate::stats::Summary;

#[derive(Debug, Clone, Serialize)]
pub struct AttackCoreRow {
    pub n: usize,
    pub k: usize,
    /// Attack threshold `⌊k^{(1+η)/(3−τ)}⌋`.
    pub m: usize,
    /// `|Core_k(G_n[V_{≤M}])| / n`.
    pub density_mean: f64,
    /// Half-width of the 95% interval.
    pub density_ci: f64,
    /// `P(D ≤ M)·h₁(D_M, p̂)` on the limiting attacked law.
    pub predicted: f64,
    /// `k^{−(τ−1)(1+ε)/(2−(τ−1)(1+ε))}`, the shape of the ρ lower bound without its constant.
    pub rho_shape: f64,
}

/// Attack at `M`, prune to the `k`-core, average the surviving fraction over `reps` graphs.
pub fn core_after_attack_experiment(
    pmf: &DegreePmf,
    n: usize,
    k: usize,
    tau: f64,
    eta: f64,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<AttackCoreRow> {
    if n == 0 || reps == 0 {
        return Err(invalid("n and reps must be positive"));
    }
    let m = attack_threshold(k, tau, eta)?.floor() as usize;
    let densities: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, &[n as u64, k as u64, r as u64]);
            let deg = sample_degree_sequence(pmf, n, &mut rng);
            let (g, _) = build_configuration_model(&deg, OddSum::AutoFix, &mut rng)?;
            let attacked = targeted_attack(&g, m);
            let core = k_core_mask(&attacked.graph, k).iter().filter(|&&b| b).count();
            Ok(core as f64 / n as f64)
        })
        .collect::<Result<_>>()?;
    let s = Summary::of(&densities);
    let predicted = if pmf.cdf(m) > 0.0 {
        let (thinned, _) = binomial_thinning_pmf(pmf, m)?;
        pmf.cdf(m) * jl_fixed_point(&thinned, k, 10_000)?.vertex_density
    } else {
        0.0
    };
    let a = (tau - 1.0) * (1.0 + eps);
    Ok(AttackCoreRow {
        n,
        k,
        m,
        density_mean: s.mean,
        density_ci: 1.96 * s.se,
        predicted,
        rho_shape: (k as f64).powf(-a / (2.0 - a)),
    })
}

/// True if every pair of rows has densities within two interval half-widths.
pub fn densities_stable(rows: &[AttackCoreRow]) -> bool {
    rows.iter().enumerate().all(|(i, a)| {
        rows[i + 1..]
            .iter()
            .all(|b| (a.density_mean - b.density_mean).abs() <= 2.0 * (a.density_ci + b.density_ci).max(1e-12))
    })
}

/// CSV with columns `n,k,M,density_mean,density_ci`.
pub fn write_density_csv<W: Write>(rows: &[AttackCoreRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k", "M", "density_mean", "density_ci"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            r.density_mean.to_string(),
            r.density_ci.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_core_keeps_every_survivor() {
        let pmf = DegreePmf::power_law(2.5, 1, 1000).unwrap();
        let row = core_after_attack_experiment(&pmf, 2000, 0, 2.5, 0.2, 0.0, 2, 1).unwrap();
        assert_eq!(row.m, 0);
        assert_eq!(row.density_mean, 0.0);
        let row = core_after_attack_experiment(&pmf, 2000, 2, 2.5, 0.2, 0.0, 2, 1).unwrap();
        assert_eq!(row.m, 5);
        assert!(row.density_mean >= 0.0 && row.density_mean < 1.0);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_density_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,k,M,density_mean,density_ci\n");
    }
}
