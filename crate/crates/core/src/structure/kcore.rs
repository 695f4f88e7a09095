use std::collections::VecDeque;

use crate::graph_core::MultiGraph;

/// Vertices surviving repeated deletion of vertices with degree `< k`.
/// Loops keep contributing 2 to their own vertex.
pub fn k_core_mask(g: &MultiGraph, k: usize) -> Vec<bool> {
    let n = g.n();
    let mut deg: Vec<usize> = g.degrees().to_vec();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| deg[v] < k).collect();
    for &v in &queue {
        alive[v] = false;
    }
    while let Some(v) = queue.pop_front() {
        for &(w, m) in g.neighbors(v) {
            let w = w as usize;
            if alive[w] {
                deg[w] -= m as usize;
                if deg[w] < k {
                    alive[w] = false;
                    queue.push_back(w);
                }
            }
        }
    }
    alive
}

/// The k-core as an induced subgraph, with the new → old index map.
pub fn k_core(g: &MultiGraph, k: usize) -> (MultiGraph, Vec<usize>) {
    g.induced_subgraph(&k_core_mask(g, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let k4 = MultiGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(k_core(&k4, 3).1, vec![0, 1, 2, 3]);
        let tree = MultiGraph::from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert!(k_core(&tree, 2).1.is_empty());
        let c5p = MultiGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 5)]);
        assert_eq!(k_core(&c5p, 2).1, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn loops_count_twice() {
        let g = MultiGraph::from_edges(2, [(0, 0), (0, 1)]);
        assert_eq!(k_core(&g, 2).1, vec![0]);
        assert_eq!(k_core(&g, 2).0.degree(0), 2);
        assert!(k_core(&g, 3).1.is_empty());
    }
}
