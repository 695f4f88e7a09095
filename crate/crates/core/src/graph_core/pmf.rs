use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TailClass {
    Explicit,
    /// `P(D ≥ z)` between `z^{-(α+ε)}` and `z^{-(α-ε)}` beyond `z0`; `α = τ - 1`.
    WeakPowerLaw {
        tau: f64,
        eps: f64,
        z0: usize,
    },
    /// Masses `exp(-g(z_i) z_i^ζ)` on the grid `z_i`.
    StretchedHeavier {
        zeta: f64,
        g_scale: f64,
        grid: Vec<usize>,
    },
    Truncated {
        z_max: usize,
    },
}

/// Finite-support probability mass function on non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreePmf {
    values: Vec<usize>,
    probs: Vec<f64>,
    tail: TailClass,
}

const SUM_TOL: f64 = 1e-12;

impl DegreePmf {
    /// Validates an explicit pmf; probabilities must already sum to one.
    pub fn new(pairs: Vec<(usize, f64)>, tail: TailClass) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        Self::from_pairs_unchecked(pairs, tail)
    }

    /// Normalises non-negative weights.
    pub fn from_weights(pairs: Vec<(usize, f64)>, tail: TailClass) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidPmf("weights must have a positive finite sum".into()));
        }
        let pairs = pairs.into_iter().map(|(v, w)| (v, w / total)).collect();
        Self::from_pairs_unchecked(pairs, tail)
    }

    fn from_pairs_unchecked(mut pairs: Vec<(usize, f64)>, tail: TailClass) -> Result<Self> {
        if pairs.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::InvalidPmf("negative or non-finite probability".into()));
        }
        pairs.retain(|p| p.1 > 0.0);
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPmf("duplicate support value".into()));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidPmf("empty support".into()));
        }
        let (values, probs) = pairs.into_iter().unzip();
        Ok(Self { values, probs, tail })
    }

    pub fn point(c: usize) -> Self {
        Self { values: vec![c], probs: vec![1.0], tail: TailClass::Explicit }
    }

    pub fn uniform(values: &[usize]) -> Result<Self> {
        Self::from_weights(values.iter().map(|&v| (v, 1.0)).collect(), TailClass::Explicit)
    }

    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("binomial p outside [0,1]"));
        }
        let pairs = (0..=n).map(|i| (i, binomial_pmf(n, p, i))).collect();
        Self::from_weights(pairs, TailClass::Truncated { z_max: n })
    }

    /// `ν(z) ∝ z^{-τ}` on `{z_min..=z_max}`.
    pub fn power_law(tau: f64, z_min: usize, z_max: usize) -> Result<Self> {
        if z_min == 0 || z_max < z_min {
            return Err(invalid("power law needs 1 ≤ z_min ≤ z_max"));
        }
        let pairs = (z_min..=z_max).map(|z| (z, (z as f64).powf(-tau))).collect();
        Self::from_weights(pairs, TailClass::WeakPowerLaw { tau, eps: 0.0, z0: z_min })
    }

    /// Heavier-than-stretched-exponential pmf: mass `exp(-g(z) z^ζ)` with
    /// `g(z) = g_scale / ln(e + z)` on `grid`, renormalised.
    pub fn stretched_heavier(zeta: f64, g_scale: f64, grid: Vec<usize>) -> Result<Self> {
        if grid.is_empty() || zeta <= 0.0 {
            return Err(invalid("stretched-heavier pmf needs ζ > 0 and a nonempty grid"));
        }
        let pairs = grid
            .iter()
            .map(|&z| {
                let zf = z as f64;
                let g = g_scale / (std::f64::consts::E + zf).ln();
                (z, (-g * zf.powf(zeta)).exp())
            })
            .collect();
        Self::from_weights(pairs, TailClass::StretchedHeavier { zeta, g_scale, grid })
    }

    /// Geometric grid `first, first·ratio, …` (rounded, deduplicated) with `count` points.
    pub fn geometric_grid(first: usize, ratio: f64, count: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..count).map(|i| (first as f64 * ratio.powi(i as i32)).round() as usize).collect();
        out.dedup();
        out
    }

    /// Empirical pmf of a sample.
    pub fn empirical(sample: &[usize]) -> Result<Self> {
        let mut counts = std::collections::BTreeMap::new();
        for &d in sample {
            *counts.entry(d).or_insert(0usize) += 1;
        }
        Self::from_weights(counts.into_iter().map(|(d, c)| (d, c as f64)).collect(), TailClass::Explicit)
    }

    pub fn with_tail(mut self, tail: TailClass) -> Self {
        self.tail = tail;
        self
    }

    pub fn tail_class(&self) -> &TailClass {
        &self.tail
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn prob(&self, z: usize) -> f64 {
        self.values.binary_search(&z).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    pub fn min_value(&self) -> usize {
        self.values[0]
    }

    pub fn max_value(&self) -> usize {
        *self.values.last().unwrap()
    }

    /// `P(D ≤ z)`.
    pub fn cdf(&self, z: usize) -> f64 {
        let k = self.values.partition_point(|&v| v <= z);
        self.probs[..k].iter().sum::<f64>().min(1.0)
    }

    /// `P(D ≥ z)`, summed from the tail for accuracy.
    pub fn tail(&self, z: usize) -> f64 {
        let k = self.values.partition_point(|&v| v < z);
        self.probs[k..].iter().rev().sum()
    }

    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.support().map(|(v, p)| p * f(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v as f64)
    }

    pub fn sampler(&self) -> Sampler {
        let mut cum = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cum.push(acc);
        }
        Sampler { values: self.values.clone(), cum }
    }

    /// True when `self` is stochastically dominated by `other` at every support point
    /// of either measure: `P_self(D ≤ z) ≥ P_other(D ≤ z) - tol`.
    pub fn dominated_by(&self, other: &DegreePmf, tol: f64) -> bool {
        let mut pts: Vec<usize> = self.values.iter().chain(&other.values).copied().collect();
        pts.sort_unstable();
        pts.dedup();
        pts.iter().all(|&z| other.cdf(z) <= self.cdf(z) + tol)
    }
}

/// Inverse-CDF sampler.
#[derive(Debug, Clone)]
pub struct Sampler {
    values: Vec<usize>,
    cum: Vec<f64>,
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cum.last().copied().unwrap_or(1.0);
        let i = self.cum.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[i]
    }

    /// Deterministic quantile: smallest value whose cumulative mass exceeds `u`.
    pub fn quantile(&self, u: f64) -> usize {
        let u = u * self.cum.last().copied().unwrap_or(1.0);
        let i = self.cum.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[i]
    }
}

pub(crate) fn ln_choose(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

pub(crate) fn binomial_pmf(n: usize, p: f64, i: usize) -> f64 {
    if i > n {
        return 0.0;
    }
    if p == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, i) + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
}

/// Size-biased law `zν(z)/E[D]`, or its shifted version `(z+1)ν(z+1)/E[D]`.
pub fn size_biased(pmf: &DegreePmf, shifted: bool) -> Result<DegreePmf> {
    let m = pmf.mean();
    if !(m > 0.0) {
        return Err(invalid("size-biasing needs E[D] > 0"));
    }
    let pairs = pmf
        .support()
        .filter(|&(v, _)| v > 0)
        .map(|(v, p)| (if shifted { v - 1 } else { v }, v as f64 * p / m))
        .collect();
    DegreePmf::from_weights(pairs, pmf.tail.clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct HashTransform {
    pub pmf: DegreePmf,
    /// The threshold `z₀#`; the transform has no mass at or below it.
    pub z0: usize,
    /// Normaliser `Σ_{i>z₀#} ν(i)^{1-η}`.
    pub z_norm: f64,
}

/// η-heavier transform.
///
/// `z₀#` is the smallest `z ≥ 1` with `min_{i≥z, ν(i)>0} ν(i)^{-η} ≥ 8/7` and
/// `Σ_{i≥z} ν(i)^{1-η} < 7/8`; the result is `ν(z)^{1-η}/Z` for `z > z₀#`.
pub fn hash_transform(pmf: &DegreePmf, eta: f64) -> Result<HashTransform> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("η must lie in (0,1)"));
    }
    let vals = &pmf.values;
    let probs = &pmf.probs;
    // Conditions only depend on which support points lie at or above z, so the
    // candidates are 1 and one past each support point.
    let mut candidates: Vec<usize> = std::iter::once(1).chain(vals.iter().map(|v| v + 1)).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let max_allowed = (7.0f64 / 8.0).powf(1.0 / eta);
    for z in candidates {
        let k = vals.partition_point(|&v| v < z);
        let max_mass = probs[k..].iter().copied().fold(0.0, f64::max);
        let s: f64 = probs[k..].iter().map(|p| p.powf(1.0 - eta)).sum();
        if max_mass <= max_allowed && s < 7.0 / 8.0 {
            let above = vals.partition_point(|&v| v <= z);
            let z_norm: f64 = probs[above..].iter().map(|p| p.powf(1.0 - eta)).sum();
            if z_norm <= 0.0 {
                return Err(Error::NoHashThreshold(format!(
                    "threshold z0 = {z} leaves no support above it (max support {})",
                    pmf.max_value()
                )));
            }
            let pairs =
                vals[above..].iter().zip(&probs[above..]).map(|(&v, &p)| (v, p.powf(1.0 - eta) / z_norm)).collect();
            let out = DegreePmf::from_weights(pairs, pmf.tail.clone())?;
            return Ok(HashTransform { pmf: out, z0: z, z_norm });
        }
    }
    Err(Error::NoHashThreshold(format!(
        "no z ≥ 1 within support [{}, {}] satisfies both conditions for η = {eta}",
        pmf.min_value(),
        pmf.max_value()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn size_biased_uniform_one_two() {
        let u = DegreePmf::uniform(&[1, 2]).unwrap();
        let sb = size_biased(&u, false).unwrap();
        assert!(close(sb.prob(1), 1.0 / 3.0) && close(sb.prob(2), 2.0 / 3.0));
        let sh = size_biased(&u, true).unwrap();
        assert!(close(sh.prob(0), 1.0 / 3.0) && close(sh.prob(1), 2.0 / 3.0));
    }

    #[test]
    fn size_biased_point_mass_is_fixed() {
        let d = DegreePmf::point(4);
        assert_eq!(size_biased(&d, false).unwrap().support().collect::<Vec<_>>(), vec![(4, 1.0)]);
    }

    #[test]
    fn size_biased_zero_mean_rejected() {
        assert!(size_biased(&DegreePmf::point(0), false).is_err());
    }

    #[test]
    fn pmf_validation() {
        assert!(DegreePmf::new(vec![(1, 0.5), (2, 0.4)], TailClass::Explicit).is_err());
        assert!(DegreePmf::new(vec![(1, 0.5), (1, 0.5)], TailClass::Explicit).is_err());
        let p = DegreePmf::new(vec![(2, 0.25), (1, 0.75)], TailClass::Explicit).unwrap();
        assert_eq!(p.values(), &[1, 2]);
    }

    #[test]
    fn hash_transform_power_law_dominates_exhaustively() {
        let nu = DegreePmf::power_law(3.5, 1, 10_000).unwrap();
        let h = hash_transform(&nu, 0.1).unwrap();
        assert!(h.z_norm < 7.0 / 8.0);
        // Exhaustive CDF comparison at every support point.
        for z in 0..=10_000 {
            assert!(h.pmf.cdf(z) <= nu.cdf(z) + 1e-12, "cdf violated at {z}");
        }
        assert!(h.pmf.values().iter().all(|&v| v > h.z0));
    }

    #[test]
    fn hash_transform_without_room_is_rejected() {
        assert!(matches!(hash_transform(&DegreePmf::point(3), 0.2), Err(Error::NoHashThreshold(_))));
    }

    #[test]
    fn sampler_frequencies() {
        let p = DegreePmf::new(vec![(0, 0.2), (3, 0.8)], TailClass::Explicit).unwrap();
        let s = p.sampler();
        let mut rng = rng_from_seed(1);
        let n = 100_000;
        let hits = (0..n).filter(|_| s.sample(&mut rng) == 3).count() as f64 / n as f64;
        assert!((hits - 0.8).abs() < 4.0 * (0.16f64 / n as f64).sqrt());
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let b = DegreePmf::binomial(10, 0.35).unwrap();
        assert!(close(b.support().map(|x| x.1).sum::<f64>(), 1.0));
        assert!((b.mean() - 3.5).abs() < 1e-12);
    }
}
