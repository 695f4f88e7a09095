use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph_core::MultiGraph;

/// Penalty function `f(d_u, d_v)` in the rate `λ·e(u,v)/f(d_u,d_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    /// `(xy)^μ`
    Product { mu: f64 },
    /// `max(x,y)^μ`
    Max { mu: f64 },
    /// `a·x^μ·y^ν`
    Monomial { a: f64, mu: f64, nu: f64 },
    /// `c`
    Constant { c: f64 },
}

impl Penalty {
    pub fn f(&self, x: f64, y: f64) -> f64 {
        match *self {
            Penalty::Product { mu } => (x * y).powf(mu),
            Penalty::Max { mu } => x.max(y).powf(mu),
            Penalty::Monomial { a, mu, nu } => a * x.powf(mu) * y.powf(nu),
            Penalty::Constant { c } => c,
        }
    }

    /// Exponent `μ` where one exists.
    pub fn mu(&self) -> Option<f64> {
        match *self {
            Penalty::Product { mu } | Penalty::Max { mu } | Penalty::Monomial { mu, .. } => Some(mu),
            Penalty::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub penalty: Penalty,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(penalty: Penalty, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid("λ must be finite and non-negative"));
        }
        match penalty {
            Penalty::Product { mu } | Penalty::Max { mu } if !(mu >= 0.0) => {
                return Err(invalid("μ must be non-negative"))
            }
            Penalty::Monomial { a, .. } if !(a > 0.0) => return Err(invalid("monomial prefactor must be positive")),
            Penalty::Constant { c } if !(c >= 1.0) => return Err(invalid("constant penalty must be ≥ 1")),
            _ => {}
        }
        Ok(Self { penalty, lambda })
    }

    pub fn product(mu: f64, lambda: f64) -> Self {
        Self::new(Penalty::Product { mu }, lambda).expect("valid product penalty")
    }

    pub fn max(mu: f64, lambda: f64) -> Self {
        Self::new(Penalty::Max { mu }, lambda).expect("valid max penalty")
    }

    /// `λ·e/f(d_u, d_v)`; zero when `e = 0`.
    pub fn rate(&self, e: u32, du: usize, dv: usize) -> f64 {
        if e == 0 {
            return 0.0;
        }
        self.lambda * e as f64 / self.penalty.f(du as f64, dv as f64)
    }
}

/// `r(u,v)` on `g`.
pub fn infection_rate(p: &PenaltySpec, g: &MultiGraph, u: usize, v: usize) -> f64 {
    p.rate(g.multiplicity(u, v), g.degree(u), g.degree(v))
}

/// Per-vertex outgoing rates with cumulative sums for categorical target choice.
#[derive(Debug, Clone)]
pub struct RateTable {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    cum: Vec<f64>,
    total: Vec<f64>,
}

impl RateTable {
    /// Loops are included as self-births only when `include_loops` is set.
    pub fn build(g: &MultiGraph, p: &PenaltySpec, include_loops: bool) -> Self {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut rates = Vec::new();
        let mut cum = Vec::new();
        let mut total = Vec::with_capacity(g.n());
        for v in 0..g.n() {
            let mut acc = 0.0;
            let dv = g.degree(v);
            let mut push = |u: usize, r: f64| {
                if r > 0.0 {
                    acc += r;
                    targets.push(u as u32);
                    rates.push(r);
                    cum.push(acc);
                }
            };
            for &(u, m) in g.neighbors(v) {
                push(u as usize, p.rate(m, dv, g.degree(u as usize)));
            }
            if include_loops && g.loops(v) > 0 {
                push(v, p.rate(g.loops(v), dv, dv));
            }
            total.push(acc);
            offsets.push(targets.len());
        }
        Self { offsets, targets, rates, cum, total }
    }

    pub fn n(&self) -> usize {
        self.total.len()
    }

    pub fn total(&self, v: usize) -> f64 {
        self.total[v]
    }

    /// Target whose cumulative-rate bucket contains `x ∈ [0, total(v))`.
    pub fn pick(&self, v: usize, x: f64) -> usize {
        let c = &self.cum[self.offsets[v]..self.offsets[v + 1]];
        let i = c.partition_point(|&a| a <= x).min(c.len() - 1);
        self.targets[self.offsets[v] + i] as usize
    }

    /// `(target, rate)` pairs out of `v`.
    pub fn arcs(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().map(|&t| t as usize).zip(self.rates[r].iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_edge_no_rate() {
        let g = MultiGraph::from_edges(3, [(0, 1)]);
        assert_eq!(infection_rate(&PenaltySpec::product(0.5, 1.0), &g, 0, 2), 0.0);
    }

    #[test]
    fn product_hand_value() {
        let p = PenaltySpec::product(0.5, 0.6);
        assert!((p.rate(1, 4, 9) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn max_hand_value() {
        let p = PenaltySpec::max(0.75, 1.0);
        assert!((p.rate(1, 16, 16) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn multiplicity_scales_rate() {
        let g = MultiGraph::from_edges(2, [(0, 1), (0, 1)]);
        let p = PenaltySpec::max(1.0, 0.5);
        assert!((infection_rate(&p, &g, 0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(PenaltySpec::new(Penalty::Constant { c: 0.5 }, 1.0).is_err());
        assert!(PenaltySpec::new(Penalty::Max { mu: -1.0 }, 1.0).is_err());
        assert!(PenaltySpec::new(Penalty::Max { mu: 1.0 }, -1.0).is_err());
    }

    #[test]
    fn penalty_at_least_one_on_positive_degrees() {
        for x in 1..20 {
            for y in 1..20 {
                for mu in [0.0, 0.3, 1.0] {
                    assert!(Penalty::Product { mu }.f(x as f64, y as f64) >= 1.0);
                    assert!(Penalty::Max { mu }.f(x as f64, y as f64) >= 1.0);
                }
            }
        }
    }

    #[test]
    fn table_pick_respects_buckets() {
        let g = MultiGraph::from_edges(3, [(0, 1), (0, 2), (0, 2), (0, 0)]);
        let t = RateTable::build(&g, &PenaltySpec::new(Penalty::Constant { c: 1.0 }, 1.0).unwrap(), true);
        assert!((t.total(0) - 4.0).abs() < 1e-15);
        assert_eq!(t.pick(0, 0.5), 1);
        assert_eq!(t.pick(0, 1.5), 2);
        assert_eq!(t.pick(0, 3.5), 0);
        let no_loops = RateTable::build(&g, &PenaltySpec::new(Penalty::Constant { c: 1.0 }, 1.0).unwrap(), false);
        assert!((no_loops.total(0) - 3.0).abs() < 1e-15);
    }
}
