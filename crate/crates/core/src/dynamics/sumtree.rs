/// Binary sum tree over non-negative weights: O(log n) update and weighted draw.
/// Internal sums are recomputed from children, so there is no accumulated drift.
#[derive(Debug, Clone)]
pub(crate) struct SumTree {
    cap: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(n: usize) -> Self {
        let cap = n.max(1).next_power_of_two();
        Self { cap, nodes: vec![0.0; 2 * cap] }
    }

    pub fn ensure(&mut self, n: usize) {
        if n <= self.cap {
            return;
        }
        let mut bigger = SumTree::new(n);
        for i in 0..self.cap {
            bigger.nodes[bigger.cap + i] = self.nodes[self.cap + i];
        }
        for i in (1..bigger.cap).rev() {
            bigger.nodes[i] = bigger.nodes[2 * i] + bigger.nodes[2 * i + 1];
        }
        *self = bigger;
    }

    pub fn set(&mut self, i: usize, w: f64) {
        let mut k = self.cap + i;
        self.nodes[k] = w;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    /// Index whose cumulative bucket contains `x ∈ [0, total)`; never returns a
    /// zero-weight leaf.
    pub fn find(&self, mut x: f64) -> usize {
        let mut k = 1;
        while k < self.cap {
            let left = self.nodes[2 * k];
            if x < left || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
                x = x.min(left);
            } else {
                x -= left;
                k = 2 * k + 1;
            }
        }
        let mut i = k - self.cap;
        if self.nodes[k] <= 0.0 {
            // Rounding pushed us onto an empty leaf; step back to a positive one.
            while i > 0 && self.nodes[self.cap + i] <= 0.0 {
                i -= 1;
            }
        }
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_matches_buckets() {
        let mut t = SumTree::new(5);
        for (i, w) in [1.0, 0.0, 2.0, 0.5, 0.0].iter().enumerate() {
            t.set(i, *w);
        }
        assert_eq!(t.total(), 3.5);
        assert_eq!(t.find(0.2), 0);
        assert_eq!(t.find(1.0), 2);
        assert_eq!(t.find(2.99), 2);
        assert_eq!(t.find(3.2), 3);
        assert_eq!(t.find(3.5), 3);
        t.ensure(20);
        assert_eq!(t.total(), 3.5);
        assert_eq!(t.find(3.2), 3);
    }
}
