use rand::Rng;

use crate::SimRng;

/// Sum tree over non-negative weights supporting draw-and-remove.
///
/// Internal nodes are recomputed from their children on every update, so
/// removals never accumulate subtraction drift.
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(weights: &[f64]) -> Self {
        let leaves = weights.len().next_power_of_two();
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + weights.len()].copy_from_slice(weights);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        SumTree { leaves, nodes }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    /// Index `i` such that the cumulative weight before `i` is `<= target`
    /// and through `i` is `> target`.
    fn find(&self, mut target: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if target < self.nodes[left] || self.nodes[left + 1] == 0.0 {
                node = left;
            } else {
                target -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.leaves
    }

    fn remove(&mut self, index: usize) {
        let mut node = index + self.leaves;
        self.nodes[node] = 0.0;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }
}

/// Sequential weighted sampling without replacement: repeatedly draw an
/// index with probability proportional to its weight among those not yet
/// drawn. Returns the draw order. All weights must be positive.
pub fn weighted_permutation(weights: &[f64], rng: &mut SimRng) -> Vec<usize> {
    debug_assert!(weights.iter().all(|&w| w > 0.0 && w.is_finite()));
    match weights.len() {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }
    let mut tree = SumTree::new(weights);
    let mut order = Vec::with_capacity(weights.len());
    for _ in 0..weights.len() {
        let u: f64 = rng.random();
        let i = tree.find(u * tree.total());
        order.push(i);
        tree.remove(i);
    }
    order
}
