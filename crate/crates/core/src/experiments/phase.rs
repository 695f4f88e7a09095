use std::collections::BTreeMap;

use serde::Serialize;

use super::config::{ExperimentConfig, Scenario};
use super::fit::Growth;
use super::runner::{run_points, scaling_groups, ScalingGroup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FastExtinction,
    SlowExtinction,
    LongSurvival,
    Ambiguous,
}

/// Censored fraction at the largest `n` above which a cell counts as surviving.
pub const CENSORED_SURVIVAL: f64 = 0.5;
/// Median ratio between the largest and smallest `n` that signals long survival.
pub const SURVIVAL_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub penalty: String,
    pub coords: BTreeMap<String, f64>,
    pub growth: Option<Growth>,
    /// Median at the largest `n` over the median at the smallest.
    pub ratio: f64,
    pub censored_at_max: f64,
    pub verdict: Verdict,
}

/// Verdict for one series of `(n, median T_ext, censored fraction)`.
///
/// `λ = 0` is fast extinction outright. Long survival: at least half the runs at the
/// largest `n` hit the horizon, exponential growth, or a median ratio of at least
/// [`SURVIVAL_RATIO`]. Otherwise bounded or logarithmic growth is fast extinction
/// and polynomial growth slow extinction. Without a fit (fewer than four sizes) a
/// ratio below `2·ln n_max / ln n_min` counts as fast.
pub fn classify_group(g: &ScalingGroup) -> PhaseCell {
    let first = g.series.first().copied().unwrap_or((1.0, 0.0, 0.0));
    let last = g.series.last().copied().unwrap_or(first);
    let ratio = if first.1 > 0.0 {
        last.1 / first.1
    } else if last.1 > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let growth = g.fit.as_ref().map(|f| f.classification);
    let zero_rate = g.coords.get("lambda").is_some_and(|&l| l == 0.0);
    let verdict = if zero_rate {
        Verdict::FastExtinction
    } else if last.2 >= CENSORED_SURVIVAL || growth == Some(Growth::Exponential) || ratio >= SURVIVAL_RATIO {
        Verdict::LongSurvival
    } else {
        match growth {
            Some(Growth::Bounded | Growth::Logarithmic) => Verdict::FastExtinction,
            Some(Growth::Polynomial) => Verdict::SlowExtinction,
            Some(_) => Verdict::Ambiguous,
            None if g.series.len() >= 2 && ratio <= 2.0 * last.0.ln() / first.0.ln() => Verdict::FastExtinction,
            None => Verdict::Ambiguous,
        }
    };
    PhaseCell { penalty: g.penalty.clone(), coords: g.coords.clone(), growth, ratio, censored_at_max: last.2, verdict }
}

pub fn classify_cells(groups: &[ScalingGroup]) -> Vec<PhaseCell> {
    groups.iter().map(classify_group).collect()
}

/// Runs a phase sweep in memory and classifies each (penalty, μ, λ, tail) cell.
pub fn phase_table(cfg: &ExperimentConfig) -> Result<Vec<PhaseCell>> {
    if !matches!(cfg.scenario, Scenario::PhaseSweep | Scenario::ExtinctionScaling) {
        return Err(Error::Config("phase table needs a phase_sweep or extinction_scaling config".into()));
    }
    let results = run_points(cfg, None)?;
    Ok(classify_cells(&scaling_groups(cfg, &results)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(lambda: f64, series: Vec<(f64, f64, f64)>) -> ScalingGroup {
        let pts: Vec<(f64, f64)> = series.iter().map(|s| (s.0, s.1)).collect();
        ScalingGroup {
            penalty: "product".into(),
            coords: BTreeMap::from([("lambda".to_string(), lambda)]),
            fit: super::super::fit::fit_scaling(&pts).ok(),
            series,
        }
    }

    #[test]
    fn verdict_rules() {
        let ns = [500.0, 1000.0, 2000.0, 4000.0, 8000.0];
        let log = group(0.5, ns.iter().map(|&n| (n, 2.0 * f64::ln(n), 0.0)).collect());
        assert_eq!(classify_group(&log).verdict, Verdict::FastExtinction);
        let cens = group(0.5, ns.iter().map(|&n| (n, 10.0, if n > 4000.0 { 0.8 } else { 0.0 })).collect());
        assert_eq!(classify_group(&cens).verdict, Verdict::LongSurvival);
        let pow = group(0.5, ns.iter().map(|&n| (n, n.sqrt(), 0.0)).collect());
        assert_eq!(classify_group(&pow).verdict, Verdict::SlowExtinction);
        let two = group(1.0, vec![(200.0, 10.0, 0.0), (2000.0, 400.0, 0.0)]);
        assert_eq!(classify_group(&two).verdict, Verdict::LongSurvival);
        let zero = group(0.0, vec![(200.0, 0.0, 0.0), (2000.0, 0.0, 0.0)]);
        assert_eq!(classify_group(&zero).verdict, Verdict::FastExtinction);
    }

    #[test]
    fn zero_rate_cell_runs_fast() {
        let cfg = ExperimentConfig::from_toml(
            r#"
schema = 1
scenario = "phase_sweep"
seed = 3
reps = 4
[graph]
pmf = { family = "power_law", tau = 2.5, z_max = 50 }
[penalty]
kind = ["product", "max"]
[grid]
n = [100, 200, 400, 800]
mu = [0.5]
lambda = [0.0]
"#,
        )
        .unwrap();
        let cells = phase_table(&cfg).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|c| c.verdict == Verdict::FastExtinction));
    }

    #[test]
    fn product_mu_one_is_fast() {
        let cfg = ExperimentConfig::from_toml(
            r#"
schema = 1
scenario = "phase_sweep"
seed = 5
reps = 15
[graph]
pmf = { family = "power_law", tau = 2.5 }
[penalty]
kind = "product"
[grid]
n = [250, 500, 1000, 2000]
mu = [1.0]
lambda = [0.5]
"#,
        )
        .unwrap();
        let cells = phase_table(&cfg).unwrap();
        assert_eq!(cells[0].verdict, Verdict::FastExtinction, "{:?}", cells[0]);
    }
}
