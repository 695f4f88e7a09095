use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph_core::DegreePmf;
use crate::stats::Running;

/// `h_k = max{(k+1)/(τ′−1) − 1, 0}`.
pub fn hk_exponent(k: usize, tau_prime: f64) -> Result<f64> {
    if !(tau_prime > 2.0) {
        return Err(invalid("τ′ must exceed 2"));
    }
    Ok(((k as f64 + 1.0) / (tau_prime - 1.0) - 1.0).max(0.0))
}

/// Checks `h_k + h_l ≤ h_{k+l}` up to rounding.
pub fn hk_superadditive(k: usize, l: usize, tau_prime: f64) -> Result<bool> {
    Ok(hk_exponent(k, tau_prime)? + hk_exponent(l, tau_prime)? <= hk_exponent(k + l, tau_prime)? + 1e-12)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEstimate {
    pub r: usize,
    pub k: u32,
    pub reps: usize,
    pub mean: f64,
    pub se: f64,
    /// Mean of `Z_r` itself, a sanity column.
    pub mean_size: f64,
}

/// Monte Carlo `E[Z_r^k]` for a Galton-Watson process with offspring law `pmf`
/// started from one individual. Fails if a generation exceeds `cap` individuals.
pub fn generation_moment_mc<R: Rng + ?Sized>(
    pmf: &DegreePmf,
    r: usize,
    k: u32,
    reps: usize,
    cap: u64,
    rng: &mut R,
) -> Result<MomentEstimate> {
    if reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let s = pmf.sampler();
    let mut moment = Running::default();
    let mut size = Running::default();
    for _ in 0..reps {
        let mut z: u64 = 1;
        for _ in 0..r {
            let mut next: u64 = 0;
            for _ in 0..z {
                next += s.sample(rng) as u64;
            }
            if next > cap {
                return Err(Error::Budget(format!("generation size above {cap}")));
            }
            z = next;
            if z == 0 {
                break;
            }
        }
        moment.push((z as f64).powi(k as i32));
        size.push(z as f64);
    }
    Ok(MomentEstimate { r, k, reps, mean: moment.mean(), se: moment.se(), mean_size: size.mean() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn exponent_values() {
        assert_eq!(hk_exponent(1, 3.5).unwrap(), 0.0);
        assert!((hk_exponent(4, 3.5).unwrap() - 1.0).abs() < 1e-12);
        // (k+1) = τ′−1 at k = 2, τ′ = 4.
        assert_eq!(hk_exponent(2, 4.0).unwrap(), 0.0);
        assert!(hk_exponent(1, 2.0).is_err());
    }

    #[test]
    fn superadditive_grid() {
        for k in 1..10 {
            for l in 1..10 {
                assert!(hk_superadditive(k, l, 3.3).unwrap());
            }
        }
    }

    #[test]
    fn binary_tree_is_deterministic() {
        let est = generation_moment_mc(&DegreePmf::point(2), 5, 2, 10, 1 << 20, &mut rng_from_seed(1)).unwrap();
        assert_eq!(est.mean, 1024.0);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn second_moment_matches_recursion() {
        // Offspring uniform on {0,1,2,3}: m = 1.5, σ² = 1.25.
        // E[Z_r²] = σ² m^{r−1} (m^r − 1)/(m − 1) + m^{2r}.
        let pmf = DegreePmf::uniform(&[0, 1, 2, 3]).unwrap();
        let (m, s2, r) = (1.5f64, 1.25, 4);
        let exact = s2 * m.powi(r - 1) * (m.powi(r) - 1.0) / (m - 1.0) + m.powi(2 * r);
        let est = generation_moment_mc(&pmf, r as usize, 2, 40_000, 1 << 20, &mut rng_from_seed(9)).unwrap();
        assert!((est.mean - exact).abs() < 4.0 * est.se, "{} vs {exact} ± {}", est.mean, est.se);
        assert!((est.mean_size - m.powi(r)).abs() < 0.2);
    }
}
