use super::{MultiGraph, MultiGraphBuilder};
use crate::error::{invalid, Result};

/// Star `K_{1,K}`: vertex 0 is the center, `1..=K` are leaves.
pub fn build_star(k: usize) -> Result<MultiGraph> {
    if k == 0 {
        return Err(invalid("star needs K ≥ 1"));
    }
    Ok(MultiGraph::from_edges(k + 1, (1..=k).map(|l| (0, l))))
}

/// Finite row of stars joined by paths.
#[derive(Debug, Clone)]
pub struct StarRow {
    pub graph: MultiGraph,
    pub centers: Vec<usize>,
    pub leaves: Vec<Vec<usize>>,
    /// `paths[i]` holds the internal vertices between `centers[i]` and `centers[i+1]`.
    pub paths: Vec<Vec<usize>>,
}

/// `num_stars` centers with `K` leaves each; consecutive centers joined by `ℓ` internal
/// degree-2 vertices.
pub fn build_star_row(k: usize, ell: usize, num_stars: usize) -> Result<StarRow> {
    if k == 0 || ell == 0 || num_stars == 0 {
        return Err(invalid("star row needs K ≥ 1, ℓ ≥ 1 and at least one star"));
    }
    let n = num_stars * (k + 1) + (num_stars - 1) * ell;
    let mut b = MultiGraphBuilder::new(n);
    let mut next = 0;
    let mut centers = Vec::new();
    let mut leaves = Vec::new();
    let mut paths = Vec::new();
    for i in 0..num_stars {
        let c = next;
        next += 1;
        if let Some(path) = paths.last() {
            let prev: &Vec<usize> = path;
            b.add_edge(*prev.last().unwrap(), c);
        }
        let ls: Vec<usize> = (next..next + k).collect();
        next += k;
        for &l in &ls {
            b.add_edge(c, l);
        }
        centers.push(c);
        leaves.push(ls);
        if i + 1 < num_stars {
            let p: Vec<usize> = (next..next + ell).collect();
            next += ell;
            b.add_edge(c, p[0]);
            for w in p.windows(2) {
                b.add_edge(w[0], w[1]);
            }
            paths.push(p);
        }
    }
    Ok(StarRow { graph: b.build(), centers, leaves, paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_three() {
        let g = build_star(3).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.degree(0), 3);
        assert!((1..4).all(|l| g.degree(l) == 1));
    }

    #[test]
    fn star_row_two_by_one() {
        let row = build_star_row(2, 1, 2).unwrap();
        assert_eq!(row.centers.len(), 2);
        assert_eq!(row.leaves.iter().flatten().count(), 4);
        assert_eq!(row.paths.iter().flatten().count(), 1);
        assert_eq!(row.graph.n(), 7);
        assert_eq!(row.graph.degree(row.centers[0]), 3);
        assert_eq!(row.graph.degree(row.centers[1]), 3);
        assert_eq!(row.graph.degree(row.paths[0][0]), 2);
    }

    #[test]
    fn interior_centers_have_k_plus_two() {
        let row = build_star_row(4, 3, 3).unwrap();
        assert_eq!(row.graph.degree(row.centers[1]), 6);
        assert_eq!(row.graph.edge_count(), row.graph.n() - 1);
    }
}
