use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::penalty::PenaltySpec;
use crate::error::{invalid, Result};
use crate::rng::substream;
use crate::stats::{median, Summary};

/// Smallest infected-leaf count that makes a `K`-star `r`-infested: `⌈rK/(16e²)⌉`.
pub fn infestation_threshold(r: f64, k: usize) -> usize {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    (r * k as f64 / (16.0 * e2)).ceil() as usize
}

/// `state` is the infected indicator vector. The center itself is not counted.
pub fn infestation_status(state: &[bool], center: usize, leaves: &[usize], r: f64) -> bool {
    let infected = leaves.iter().filter(|&&l| l != center && state[l]).count();
    let need = infestation_threshold(r, leaves.len()).max(1);
    infected >= need
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StarStart {
    /// Only the center infected.
    Center,
    /// Center healthy, this many leaves infected.
    Leaves(usize),
    /// Center healthy, `⌈λK^{1−μ}/(8e)⌉` leaves infected.
    Conditioned,
}

#[derive(Debug, Clone)]
pub struct StarConfig {
    pub k: usize,
    pub penalty: PenaltySpec,
    pub reps: usize,
    pub horizon: f64,
    pub start: StarStart,
    pub seed: u64,
    /// Also simulate the leaf-count chain event by event to measure the infested
    /// fraction of time. Costs O(events); keep the horizon modest.
    pub track_infestation: bool,
}

impl StarConfig {
    pub fn new(k: usize, penalty: PenaltySpec, reps: usize, horizon: f64, seed: u64) -> Self {
        StarConfig { k, penalty, reps, horizon, start: StarStart::Center, seed, track_infestation: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StarSurvival {
    pub k: usize,
    /// Extinction times, censored runs recorded at the horizon.
    pub times: Vec<f64>,
    pub censored: usize,
    pub median: f64,
    /// True if at least half the runs were censored (median is then a lower bound).
    pub median_censored: bool,
    pub mean: f64,
    pub mean_se: f64,
    pub infested_fraction: Option<f64>,
    /// `K^{1−2μ}` for regressing `ln(median)` against.
    pub scale: f64,
}

/// `⌈λK^{1−μ}/(8e)⌉` clamped to `[1, K]`; `μ = 0` for penalties without an exponent.
pub fn conditioned_leaf_count(p: &PenaltySpec, k: usize) -> usize {
    let mu = p.penalty.mu().unwrap_or(0.0);
    let m = (p.lambda * (k as f64).powf(1.0 - mu) / (8.0 * std::f64::consts::E)).ceil() as usize;
    m.clamp(1, k.max(1))
}

/// Center-to-leaf and leaf-to-center rates on a `K`-star.
fn star_rates(p: &PenaltySpec, k: usize) -> (f64, f64) {
    (p.rate(1, k, 1), p.rate(1, 1, k))
}

fn initial_leaves(cfg: &StarConfig) -> (bool, usize) {
    match cfg.start {
        StarStart::Center => (true, 0),
        StarStart::Leaves(m) => (false, m.min(cfg.k)),
        StarStart::Conditioned => (false, conditioned_leaf_count(&cfg.penalty, cfg.k)),
    }
}

fn binom<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> usize {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as usize
}

/// Exact extinction time of the CP on a `K`-star, sampled one center phase at a time.
///
/// While the center is infected (an Exp(1) stretch) the leaves are independent
/// two-state chains. While it is healthy each infected leaf independently either
/// heals first or reinfects the center first. Returns `None` if censored.
pub fn star_extinction_time<R: Rng + ?Sized>(
    k: usize,
    a: f64,
    b: f64,
    center: bool,
    leaves: usize,
    horizon: f64,
    rng: &mut R,
) -> Option<f64> {
    let mut t = 0.0;
    let mut j = leaves;
    let mut center = center;
    loop {
        if center {
            let tau = rng.sample::<f64, _>(Exp1);
            if t + tau > horizon {
                return None;
            }
            let s = (-(1.0 + a) * tau).exp();
            let p01 = a / (1.0 + a) * (1.0 - s);
            let p11 = a / (1.0 + a) + s / (1.0 + a);
            j = binom(j, p11, rng) + binom(k - j, p01, rng);
            t += tau;
            center = false;
        } else {
            if j == 0 {
                return Some(t);
            }
            let c = 1.0 + b;
            let m = binom(j, b / c, rng);
            if m == 0 {
                let u: f64 = rng.random();
                let dt = -(1.0 - u.powf(1.0 / j as f64)).ln() / c;
                return if t + dt > horizon { None } else { Some(t + dt) };
            }
            let s = rng.sample::<f64, _>(Exp1) / (m as f64 * c);
            if t + s > horizon {
                return None;
            }
            j = m + binom(j - m, (-c * s).exp(), rng);
            t += s;
            center = true;
        }
    }
}

/// Event-level leaf-count chain. Returns (extinction time or None, time spent infested).
fn star_count_chain<R: Rng + ?Sized>(
    k: usize,
    a: f64,
    b: f64,
    center: bool,
    leaves: usize,
    horizon: f64,
    threshold: usize,
    rng: &mut R,
) -> (Option<f64>, f64) {
    let (mut c, mut j, mut t, mut infested) = (center, leaves, 0.0, 0.0);
    loop {
        if !c && j == 0 {
            return (Some(t), infested);
        }
        let heal_leaf = j as f64;
        let (other, w) = if c {
            let up = a * (k - j) as f64;
            (up, 1.0 + up + heal_leaf)
        } else {
            let up = b * j as f64;
            (up, up + heal_leaf)
        };
        let dt = rng.sample::<f64, _>(Exp1) / w;
        let end = (t + dt).min(horizon);
        if j >= threshold {
            infested += end - t;
        }
        if t + dt > horizon {
            return (None, infested);
        }
        t += dt;
        let u = rng.random::<f64>() * w;
        if u < heal_leaf {
            j -= 1;
        } else if u < heal_leaf + other {
            if c {
                j += 1;
            } else {
                c = true;
            }
        } else {
            c = false;
        }
    }
}

pub fn star_survival_experiment(cfg: &StarConfig) -> Result<StarSurvival> {
    if cfg.k == 0 {
        return Err(invalid("star needs at least one leaf"));
    }
    if !(cfg.horizon > 0.0) || cfg.reps == 0 {
        return Err(invalid("horizon and reps must be positive"));
    }
    let (a, b) = star_rates(&cfg.penalty, cfg.k);
    let (c0, j0) = initial_leaves(cfg);
    let runs: Vec<(Option<f64>, Option<f64>)> = (0..cfg.reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, &[cfg.k as u64, i as u64]);
            let t = star_extinction_time(cfg.k, a, b, c0, j0, cfg.horizon, &mut rng);
            let frac = cfg.track_infestation.then(|| {
                let thr = infestation_threshold(a, cfg.k).max(1);
                let (te, inf) = star_count_chain(cfg.k, a, b, c0, j0, cfg.horizon, thr, &mut rng);
                let span = te.unwrap_or(cfg.horizon);
                if span > 0.0 {
                    inf / span
                } else {
                    0.0
                }
            });
            (t, frac)
        })
        .collect();
    let censored = runs.iter().filter(|r| r.0.is_none()).count();
    let times: Vec<f64> = runs.iter().map(|r| r.0.unwrap_or(cfg.horizon)).collect();
    let summary = Summary::of(&times);
    let infested_fraction = cfg.track_infestation.then(|| {
        let fr: Vec<f64> = runs.iter().filter_map(|r| r.1).collect();
        Summary::of(&fr).mean
    });
    let mu = cfg.penalty.penalty.mu().unwrap_or(0.0);
    Ok(StarSurvival {
        k: cfg.k,
        median: median(&times),
        median_censored: 2 * censored >= cfg.reps,
        mean: summary.mean,
        mean_se: summary.se,
        censored,
        times,
        infested_fraction,
        scale: (cfg.k as f64).powf(1.0 - 2.0 * mu),
    })
}

/// Fraction of `[0, T]` a two-state chain started in state 0 spends in state 1.
pub fn two_state_occupation<R: Rng + ?Sized>(q01: f64, q10: f64, horizon: f64, rng: &mut R) -> Result<f64> {
    if !(q01 >= 0.0 && q10 >= 0.0) || !(horizon > 0.0) {
        return Err(invalid("rates must be non-negative and horizon positive"));
    }
    let (mut t, mut state, mut occupied) = (0.0, false, 0.0);
    while t < horizon {
        let rate = if state { q10 } else { q01 };
        let dt = if rate > 0.0 { rng.sample::<f64, _>(Exp1) / rate } else { f64::INFINITY };
        let end = (t + dt).min(horizon);
        if state {
            occupied += end - t;
        }
        t = end;
        state = !state;
    }
    Ok(occupied / horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_cp, CpOptions};
    use crate::graph_core::build_star;
    use crate::rng::rng_from_seed;

    #[test]
    fn threshold_hand_value() {
        let r = 100f64.powf(-0.25);
        assert_eq!(infestation_threshold(r, 100), 1);
    }

    #[test]
    fn status_extremes() {
        let leaves: Vec<usize> = (1..=100).collect();
        let mut state = vec![false; 101];
        assert!(!infestation_status(&state, 0, &leaves, 0.3));
        state.iter_mut().for_each(|s| *s = true);
        assert!(infestation_status(&state, 0, &leaves, 0.3));
    }

    #[test]
    fn lambda_zero_center_median_is_ln2() {
        let cfg = StarConfig::new(30, PenaltySpec::product(0.5, 0.0), 20_000, 100.0, 7);
        let out = star_survival_experiment(&cfg).unwrap();
        assert!((out.median - 2f64.ln()).abs() < 0.03, "{}", out.median);
        assert_eq!(out.censored, 0);
    }

    #[test]
    fn cycle_engine_matches_event_engine() {
        let k = 6;
        let p = PenaltySpec::max(0.25, 1.2);
        let (a, b) = star_rates(&p, k);
        let g = build_star(k).unwrap();
        let reps = 20_000;
        let mut rng = rng_from_seed(11);
        let fast: Vec<f64> =
            (0..reps).map(|_| star_extinction_time(k, a, b, true, 0, 1e9, &mut rng).unwrap()).collect();
        let slow: Vec<f64> = (0..reps)
            .map(|_| simulate_cp(&g, &p, &[0], &CpOptions::with_horizon(1e9), &mut rng).unwrap().report.t_ext)
            .collect();
        let (f, s) = (Summary::of(&fast), Summary::of(&slow));
        let se = (f.se * f.se + s.se * s.se).sqrt();
        assert!((f.mean - s.mean).abs() < 4.0 * se, "{} vs {} (se {se})", f.mean, s.mean);
    }

    #[test]
    fn count_chain_matches_cycle_engine() {
        let (k, a, b) = (8, 0.4, 0.4);
        let mut rng = rng_from_seed(12);
        let reps = 20_000;
        let x: Vec<f64> = (0..reps).map(|_| star_extinction_time(k, a, b, false, 3, 1e9, &mut rng).unwrap()).collect();
        let y: Vec<f64> = (0..reps).map(|_| star_count_chain(k, a, b, false, 3, 1e9, 1, &mut rng).0.unwrap()).collect();
        let (f, s) = (Summary::of(&x), Summary::of(&y));
        let se = (f.se * f.se + s.se * s.se).sqrt();
        assert!((f.mean - s.mean).abs() < 4.0 * se, "{} vs {}", f.mean, s.mean);
    }

    #[test]
    fn conditioned_start_count() {
        let cfg = StarConfig {
            start: StarStart::Conditioned,
            ..StarConfig::new(100, PenaltySpec::product(0.25, 1.0), 1, 1.0, 0)
        };
        // 100^{0.75}/(8e) = 1.455
        assert_eq!(initial_leaves(&cfg), (false, 2));
    }

    #[test]
    fn occupation_fractions() {
        let mut rng = rng_from_seed(3);
        let f = two_state_occupation(1.0, 1.0, 1e4, &mut rng).unwrap();
        assert!((f - 0.5).abs() < 0.02);
        let f = two_state_occupation(1.0, 0.5, 1e4, &mut rng).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 0.02);
        let f = two_state_occupation(1.0, 0.0, 1e4, &mut rng).unwrap();
        assert!(f > 0.99);
    }
}
