use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};

/// What the tail check is run on.
pub enum TailInput<'a> {
    /// Degree sample or degree sequence.
    Samples(&'a [usize]),
    /// Analytic `z ↦ P(D ≥ z)`.
    Tail(&'a dyn Fn(usize) -> f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub z: usize,
    pub tail: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakPowerLawReport {
    pub alpha: f64,
    pub eps: f64,
    pub rows: Vec<TailRow>,
    pub lower_pass: bool,
    pub upper_pass: bool,
    /// `ν_n(z) ≤ C_u z^{-τ(1-ε)}` for `z ≥ z₀`, `τ = α + 1` (samples only).
    pub point_mass_pass: Option<bool>,
    /// `max d ≤ C_u n^{1/(τ(1-ε)-1)}` (samples only).
    pub max_degree_pass: Option<bool>,
}

impl WeakPowerLawReport {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.upper_pass
    }
}

/// Two-sided tail check `z^{-α(1+ε)} ≤ P(D ≥ z) ≤ z^{-α(1-ε)}`.
///
/// The lower bound is checked on `[z₀, z_max]`; the upper bound on `[z₀, z_max]` for
/// analytic tails and on `[z₀, max sample]` for samples. `c_u` is the constant of the
/// point-mass and max-degree companions.
pub fn check_weak_power_law(
    input: TailInput<'_>,
    alpha: f64,
    eps: f64,
    z0: usize,
    z_max: usize,
    c_u: f64,
) -> Result<WeakPowerLawReport> {
    if z0 == 0 || z_max < z0 {
        return Err(invalid("need 1 ≤ z₀ ≤ z_max"));
    }
    let lower = |z: usize| (z as f64).powf(-alpha * (1.0 + eps));
    let upper = |z: usize| (z as f64).powf(-alpha * (1.0 - eps));
    let mut rows = Vec::new();
    let mut point_mass_pass = None;
    let mut max_degree_pass = None;
    match input {
        TailInput::Samples(s) => {
            if s.is_empty() {
                return Err(invalid("empty sample"));
            }
            let n = s.len();
            let max = *s.iter().max().unwrap();
            let mut counts = vec![0usize; max + 2];
            for &d in s {
                counts[d] += 1;
            }
            // ge[z] = #{d ≥ z}
            let mut ge: Vec<usize> = counts
                .iter()
                .rev()
                .scan(0, |acc, &c| {
                    *acc += c;
                    Some(*acc)
                })
                .collect();
            ge.reverse();
            let top = z_max.max(max);
            for z in z0..=top {
                let tail = ge.get(z).map_or(0.0, |&c| c as f64 / n as f64);
                let in_range = z <= z_max;
                rows.push(TailRow {
                    z,
                    tail,
                    lower: lower(z),
                    upper: upper(z),
                    lower_ok: !in_range || tail >= lower(z),
                    upper_ok: tail <= upper(z),
                });
            }
            let tau = alpha + 1.0;
            let pm = (z0..=max).all(|z| counts[z] as f64 / n as f64 <= c_u * (z as f64).powf(-tau * (1.0 - eps)));
            point_mass_pass = Some(pm);
            let expo = tau * (1.0 - eps) - 1.0;
            max_degree_pass = Some(expo > 0.0 && (max as f64) <= c_u * (n as f64).powf(1.0 / expo));
        }
        TailInput::Tail(f) => {
            for z in z0..=z_max {
                let tail = f(z);
                rows.push(TailRow {
                    z,
                    tail,
                    lower: lower(z),
                    upper: upper(z),
                    lower_ok: tail >= lower(z) * (1.0 - 1e-12),
                    upper_ok: tail <= upper(z) * (1.0 + 1e-12),
                });
            }
        }
    }
    let lower_pass = rows.iter().all(|r| r.lower_ok);
    let upper_pass = rows.iter().all(|r| r.upper_ok);
    Ok(WeakPowerLawReport { alpha, eps, rows, lower_pass, upper_pass, point_mass_pass, max_degree_pass })
}

/// Discrete Pareto sample `⌊U^{-1/α}⌋`, so that `P(D ≥ z) = z^{-α}` for integers `z ≥ 1`.
pub fn pareto_samples<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            let x = u.powf(-1.0 / alpha);
            if x >= usize::MAX as f64 {
                usize::MAX / 2
            } else {
                x.floor() as usize
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn analytic_pareto_passes_with_zero_margin() {
        let f = |z: usize| (z as f64).powf(-1.5);
        let r = check_weak_power_law(TailInput::Tail(&f), 1.5, 0.0, 1, 10_000, 1.0).unwrap();
        assert!(r.pass());
    }

    #[test]
    fn exponential_tail_fails_lower_bound() {
        let f = |z: usize| (-(z as f64) / 3.0).exp();
        let r = check_weak_power_law(TailInput::Tail(&f), 1.5, 0.1, 2, 200, 1.0).unwrap();
        assert!(!r.lower_pass);
        let first_bad = r.rows.iter().find(|row| !row.lower_ok).unwrap().z;
        assert!(r.rows.iter().filter(|row| row.z >= first_bad).all(|row| !row.lower_ok));
    }

    #[test]
    fn iid_pareto_sample_passes() {
        let n = 100_000;
        let alpha = 1.5;
        let eps = 0.1;
        let s = pareto_samples(alpha, n, &mut rng_from_seed(2024));
        let z_max = (n as f64).powf(1.0 / (alpha * (1.0 + eps))).floor() as usize;
        let r = check_weak_power_law(TailInput::Samples(&s), alpha, eps, 10, z_max, 1.0).unwrap();
        assert!(r.pass(), "{:?}", r.rows.iter().find(|x| !x.lower_ok || !x.upper_ok));
    }
}
