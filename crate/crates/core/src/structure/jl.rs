use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph_core::DegreePmf;

/// `(h, h₁)` with `h = E[X 1{X ≥ k}]`, `h₁ = P(X ≥ k)` and `X ~ Bin(D, p)`.
pub fn h_h1(pmf: &DegreePmf, p: f64, k: usize) -> (f64, f64) {
    let p = p.clamp(0.0, 1.0);
    let (mut h, mut h1) = (0.0, 0.0);
    for (d, w) in pmf.support() {
        if d < k {
            continue;
        }
        // complement over j < k keeps the cost at O(k) per support point
        let (mut low_mass, mut low_mean) = (0.0, 0.0);
        if p < 1.0 {
            let ratio = p / (1.0 - p);
            let mut b = (1.0 - p).powi(d as i32);
            for j in 0..k {
                low_mass += b;
                low_mean += j as f64 * b;
                b *= (d - j) as f64 / (j + 1) as f64 * ratio;
            }
        }
        h += w * (d as f64 * p - low_mean).max(0.0);
        h1 += w * (1.0 - low_mass).max(0.0);
    }
    (h, h1)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub p_hat: f64,
    /// `h₁(D, p̂)`.
    pub vertex_density: f64,
    /// `E[D]p̂²/2`.
    pub edge_density: f64,
    pub bracket: Option<(f64, f64)>,
    /// Minimum support `≥ k`: nothing is pruned.
    pub degenerate: bool,
    /// `E[D]p² − h(D,p) < 0` just below `p̂`.
    pub side_condition: bool,
    pub residual: f64,
}

fn f_jl(pmf: &DegreePmf, mean: f64, k: usize, p: f64) -> f64 {
    mean * p * p - h_h1(pmf, p, k).0
}

/// Largest `p ≤ 1` with `E[D]p² = h(D,p)`: a downward grid scan for the first
/// sign change, then bisection.
pub fn jl_fixed_point(pmf: &DegreePmf, k: usize, grid: usize) -> Result<FixedPointReport> {
    let mean = pmf.mean();
    if !(mean > 0.0) {
        return Err(invalid("fixed point needs E[D] > 0"));
    }
    if grid < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let report = |p: f64, bracket, degenerate| {
        let (h, h1) = h_h1(pmf, p, k);
        let below = (p - 1e-6).max(0.0);
        FixedPointReport {
            p_hat: p,
            vertex_density: h1,
            edge_density: mean * p * p / 2.0,
            bracket,
            degenerate,
            side_condition: p > 0.0 && f_jl(pmf, mean, k, below) < 0.0,
            residual: mean * p * p - h,
        }
    };
    if pmf.min_value() >= k {
        return Ok(report(1.0, None, true));
    }
    let f = |p: f64| f_jl(pmf, mean, k, p);
    if f(1.0).abs() <= 1e-14 {
        return Ok(report(1.0, None, false));
    }
    let step = 1.0 / (grid - 1) as f64;
    let mut hi = 1.0;
    for i in (1..grid - 1).rev() {
        let lo = i as f64 * step;
        if f(lo) <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-12 {
                let mid = 0.5 * (a + b);
                if f(mid) <= 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(report(0.5 * (a + b), Some((lo, hi)), false));
        }
        hi = lo;
    }
    Ok(report(0.0, None, false))
}

/// `(η_min, ζ_min)` for a `τ`-power law with slack `ε`.
pub fn eta_zeta_min(tau: f64, eps: f64) -> Result<(f64, f64)> {
    if !(tau > 2.0 && tau < 3.0) {
        return Err(invalid("τ must lie in (2,3)"));
    }
    if !(eps >= 0.0 && eps < (3.0 - tau) / (tau - 1.0)) {
        return Err(invalid("ε must lie in [0, (3−τ)/(τ−1))"));
    }
    let eta = (3.0 - tau) / ((3.0 - tau) - eps * (tau - 1.0)) * (1.0 + eps) / (1.0 - eps) - 1.0;
    Ok((eta, (eta + 1.0) / (3.0 - tau)))
}

/// `M = k^{(1+η)/(3−τ)}`.
pub fn attack_threshold(k: usize, tau: f64, eta: f64) -> Result<f64> {
    if !(tau > 2.0 && tau < 3.0) {
        return Err(invalid("τ must lie in (2,3)"));
    }
    Ok((k as f64).powf((1.0 + eta) / (3.0 - tau)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_boundary_values() {
        let pmf = DegreePmf::binomial(6, 0.4).unwrap();
        let (h, h1) = h_h1(&pmf, 1.0, 3);
        assert!((h - pmf.expect(|d| if d >= 3 { d as f64 } else { 0.0 })).abs() < 1e-12);
        assert!((h1 - pmf.tail(3)).abs() < 1e-12);
        assert_eq!(h_h1(&pmf, 0.0, 3), (0.0, 0.0));
    }

    #[test]
    fn three_regular_closed_form() {
        let pmf = DegreePmf::point(3);
        for p in [0.1, 0.5, 0.9] {
            let (h, h1) = h_h1(&pmf, p, 3);
            assert!((h - 3.0 * p * p * p).abs() < 1e-12);
            assert!((h1 - p * p * p).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_empty_cores() {
        let r = jl_fixed_point(&DegreePmf::point(4), 3, 1000).unwrap();
        assert!(r.degenerate && r.p_hat == 1.0 && r.vertex_density == 1.0);
        let none = jl_fixed_point(&DegreePmf::binomial(4, 0.5).unwrap(), 6, 1000).unwrap();
        assert_eq!(none.vertex_density, 0.0);
    }

    #[test]
    fn fixed_point_satisfies_equation() {
        let pmf = DegreePmf::binomial(10, 0.5).unwrap();
        let r = jl_fixed_point(&pmf, 3, 10_000).unwrap();
        assert!(r.residual.abs() < 1e-10);
        assert!(r.p_hat > 0.9 && r.p_hat < 1.0 && r.side_condition);
        assert!(r.vertex_density > 0.5 && r.vertex_density < 1.0);
    }

    #[test]
    fn subcritical_mean_has_no_three_core() {
        // E[D]p² > h(p) on all of (0, 1] here.
        let pmf = DegreePmf::binomial(10, 0.35).unwrap();
        let r = jl_fixed_point(&pmf, 3, 10_000).unwrap();
        assert_eq!(r.p_hat, 0.0);
        assert_eq!(r.vertex_density, 0.0);
    }

    #[test]
    fn closed_forms() {
        assert!(eta_zeta_min(2.5, 0.0).unwrap().0.abs() < 1e-15);
        let (eta, zeta) = eta_zeta_min(2.5, 0.1).unwrap();
        assert!((eta - 0.746).abs() < 1e-3);
        assert!((zeta - (eta + 1.0) / 0.5).abs() < 1e-12);
        assert!(eta_zeta_min(2.5, 0.4).is_err());
        assert!((attack_threshold(16, 2.5, 1.0).unwrap() - 65536.0).abs() < 1e-6);
    }
}
