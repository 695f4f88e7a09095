use rand::seq::SliceRandom;
use rand::Rng;

use super::{DegreePmf, MultiGraph, MultiGraphBuilder};
use crate::error::{Error, Result};

/// What to do with an odd half-edge total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OddSum {
    #[default]
    Reject,
    /// Add one half-edge to the highest-index vertex.
    AutoFix,
}

/// Uniform perfect matching of half-edges.
///
/// Returns the graph together with the (possibly fixed) degree sequence used.
pub fn build_configuration_model<R: Rng + ?Sized>(
    deg_seq: &[usize],
    odd: OddSum,
    rng: &mut R,
) -> Result<(MultiGraph, Vec<usize>)> {
    let mut degs = deg_seq.to_vec();
    let total: usize = degs.iter().sum();
    if total % 2 == 1 {
        match odd {
            OddSum::Reject => return Err(Error::OddDegreeSum(total as u64)),
            OddSum::AutoFix => match degs.last_mut() {
                Some(d) => *d += 1,
                None => return Err(Error::OddDegreeSum(total as u64)),
            },
        }
    }
    let mut half: Vec<u32> = Vec::with_capacity(total + 1);
    for (v, &d) in degs.iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32, d));
    }
    half.shuffle(rng);
    let mut b = MultiGraphBuilder::new(degs.len());
    for pair in half.chunks_exact(2) {
        b.add_edge(pair[0] as usize, pair[1] as usize);
    }
    Ok((b.build(), degs))
}

/// iid degrees from `pmf`.
pub fn sample_degree_sequence<R: Rng + ?Sized>(pmf: &DegreePmf, n: usize, rng: &mut R) -> Vec<usize> {
    let s = pmf.sampler();
    (0..n).map(|_| s.sample(rng)).collect()
}
