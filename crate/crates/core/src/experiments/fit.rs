use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::{ols, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Logarithmic,
    Polynomial,
    Exponential,
    Ambiguous,
}

/// Least-squares comparison of `T(n)` against `a + b ln n`, `a n^b` and `a e^{bn}`.
///
/// Each model is fitted on its linearising transform (`T` vs `ln n`, `ln T` vs `ln n`,
/// `ln T` vs `n`) and R² is taken on that scale.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub points: usize,
    pub logarithmic: LinearFit,
    /// `None` when some `T ≤ 0`.
    pub polynomial: Option<LinearFit>,
    pub exponential: Option<LinearFit>,
    pub best: Growth,
    pub runner_up: Growth,
    /// R² of the best model minus the runner-up.
    pub gap: f64,
    pub classification: Growth,
}

pub const GAP: f64 = 0.05;
/// Relative spread below which a series counts as bounded.
pub const FLAT: f64 = 0.05;

/// Classifies the growth of `T` in `n`.
///
/// Bounded when the series is flat or no model has a slope two standard errors above
/// zero. Otherwise the best R² wins by a margin of [`GAP`]. A near tie between the
/// logarithmic and power models goes to the logarithm when the fitted power is no
/// steeper than 1.5 times the elasticity `1/ln n` of a logarithm at the geometric
/// mean of the sampled `n`, and to the power model otherwise. Other ties are ambiguous.
pub fn fit_scaling(series: &[(f64, f64)]) -> Result<ScalingFit> {
    if series.len() < 4 {
        return Err(invalid("scaling fit needs at least 4 points"));
    }
    if series.iter().any(|&(n, t)| !(n > 1.0) || !t.is_finite()) {
        return Err(invalid("scaling fit needs n > 1 and finite T"));
    }
    let ns: Vec<f64> = series.iter().map(|p| p.0).collect();
    let ts: Vec<f64> = series.iter().map(|p| p.1).collect();
    let ln_n: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let logarithmic = ols(&ln_n, &ts);
    let positive = ts.iter().all(|&t| t > 0.0);
    let ln_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let polynomial = positive.then(|| ols(&ln_n, &ln_t));
    let exponential = positive.then(|| ols(&ns, &ln_t));

    let mut ranked = vec![(Growth::Logarithmic, logarithmic.r2)];
    if let (Some(p), Some(e)) = (polynomial, exponential) {
        ranked.push((Growth::Polynomial, p.r2));
        ranked.push((Growth::Exponential, e.r2));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best, r_best) = ranked[0];
    let (runner_up, r_second) = ranked.get(1).copied().unwrap_or((Growth::Ambiguous, 0.0));
    let gap = r_best - r_second;

    let mean = ts.iter().sum::<f64>() / ts.len() as f64;
    let (lo, hi) = ts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let flat = mean.abs() > 0.0 && (hi - lo) / mean.abs() <= FLAT || hi == lo;
    let rising = [Some(logarithmic), polynomial, exponential].iter().flatten().any(|f| f.slope > 2.0 * f.slope_se);

    let classification = if flat || !rising {
        Growth::Bounded
    } else if gap >= GAP {
        best
    } else {
        match (best, runner_up) {
            (Growth::Logarithmic, Growth::Polynomial) | (Growth::Polynomial, Growth::Logarithmic) => {
                let gm = ln_n.iter().sum::<f64>() / ln_n.len() as f64;
                let power = polynomial.map_or(f64::INFINITY, |p| p.slope);
                if power <= 1.5 / gm {
                    Growth::Logarithmic
                } else {
                    Growth::Polynomial
                }
            }
            _ => Growth::Ambiguous,
        }
    };
    Ok(ScalingFit { points: series.len(), logarithmic, polynomial, exponential, best, runner_up, gap, classification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    fn grid() -> Vec<f64> {
        vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0]
    }

    #[test]
    fn synthetic_log_with_noise() {
        let noise = Normal::new(0.0, 0.1).unwrap();
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let s: Vec<_> = grid().into_iter().map(|n| (n, 2.0 * n.ln() + noise.sample(&mut rng))).collect();
            assert_eq!(fit_scaling(&s).unwrap().classification, Growth::Logarithmic, "seed {seed}");
        }
    }

    #[test]
    fn synthetic_exponential() {
        let s: Vec<_> = (1..=8).map(|i| (10.0 * i as f64, (0.1 * 10.0 * i as f64).exp())).collect();
        let f = fit_scaling(&s).unwrap();
        assert_eq!(f.classification, Growth::Exponential);
        assert!((f.exponential.unwrap().slope - 0.1).abs() < 1e-12);
    }

    #[test]
    fn synthetic_power() {
        let s: Vec<_> = grid().into_iter().map(|n| (n, 0.5 * n.sqrt())).collect();
        assert_eq!(fit_scaling(&s).unwrap().classification, Growth::Polynomial);
    }

    #[test]
    fn constant_is_bounded() {
        let s: Vec<_> = grid().into_iter().map(|n| (n, 3.0)).collect();
        assert_eq!(fit_scaling(&s).unwrap().classification, Growth::Bounded);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_scaling(&[(10.0, 1.0), (20.0, 2.0), (30.0, 3.0)]).is_err());
    }
}
