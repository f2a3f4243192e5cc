//! Huffman coding tree for hierarchical softmax.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Binary Huffman tree over `n` leaves with `n - 1` internal nodes.
///
/// Internal nodes are numbered in creation order, so the root is `n - 2`.
/// For every leaf, `points` lists the internal nodes from the root down and
/// `codes` the branch taken at each (`false` = 0, `true` = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    codes: Vec<Vec<bool>>,
    points: Vec<Vec<u32>>,
}

impl HuffmanTree {
    /// Build from leaf weights. Zero weights are treated as 1. Equal weights
    /// are merged in leaf-id order (leaves before internal nodes), so the
    /// tree is a pure function of the weights.
    pub fn build(weights: &[u64]) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(Error::Config(format!(
                "hierarchical softmax needs at least 2 types, got {n}"
            )));
        }
        // (weight, tiebreak, node): leaves are 0..n, internal nodes n..2n-1
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Reverse((w.max(1), i)))
            .collect();
        let mut parent = vec![0usize; 2 * n - 1];
        let mut bit = vec![false; 2 * n - 1];
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((w1, a)) = heap.pop().expect("len > 1");
            let Reverse((w2, b)) = heap.pop().expect("len > 1");
            parent[a] = next;
            parent[b] = next;
            bit[b] = true;
            heap.push(Reverse((w1 + w2, next)));
            next += 1;
        }
        let root = 2 * n - 2;
        let mut codes = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push((node - n) as u32);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            points.push(path);
        }
        Ok(Self { codes, points })
    }

    pub fn num_leaves(&self) -> usize {
        self.codes.len()
    }

    pub fn num_internal(&self) -> usize {
        self.codes.len() - 1
    }

    pub fn code(&self, leaf: u32) -> &[bool] {
        &self.codes[leaf as usize]
    }

    pub fn points(&self, leaf: u32) -> &[u32] {
        &self.points[leaf as usize]
    }

    /// Σ weight·code length.
    pub fn weighted_length(&self, weights: &[u64]) -> u64 {
        weights
            .iter()
            .zip(&self.codes)
            .map(|(&w, c)| w.max(1) * c.len() as u64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_leaves() {
        let t = HuffmanTree::build(&[1, 1]).unwrap();
        assert_eq!(t.code(0).len(), 1);
        assert_eq!(t.code(1).len(), 1);
        assert_ne!(t.code(0), t.code(1));
    }

    #[test]
    fn skewed_three_leaves() {
        let t = HuffmanTree::build(&[4, 1, 1]).unwrap();
        assert_eq!(t.code(0).len(), 1);
        assert_eq!(t.code(1).len(), 2);
        assert_eq!(t.code(2).len(), 2);
    }

    #[test]
    fn too_small() {
        assert!(HuffmanTree::build(&[5]).is_err());
        assert!(HuffmanTree::build(&[]).is_err());
    }

    #[test]
    fn deterministic() {
        let w = [3, 3, 3, 3, 1, 1, 7];
        assert_eq!(HuffmanTree::build(&w).unwrap(), HuffmanTree::build(&w).unwrap());
    }

    fn prefix_free(t: &HuffmanTree) -> bool {
        let n = t.num_leaves() as u32;
        (0..n).all(|a| (0..n).all(|b| a == b || !t.code(b).starts_with(t.code(a))))
    }

    /// Textbook Huffman cost: repeatedly merge the two lightest weights in a
    /// sorted list; the cost is the sum of all merged weights.
    fn textbook_cost(weights: &[u64]) -> u64 {
        let mut w: Vec<u64> = weights.iter().map(|&x| x.max(1)).collect();
        let mut cost = 0;
        while w.len() > 1 {
            w.sort_unstable_by(|a, b| b.cmp(a));
            let a = w.pop().unwrap();
            let b = w.pop().unwrap();
            cost += a + b;
            w.push(a + b);
        }
        cost
    }

    #[test]
    fn random_table_matches_textbook_cost() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let weights: Vec<u64> = (0..50).map(|_| rng.random_range(1..1000)).collect();
        let t = HuffmanTree::build(&weights).unwrap();
        assert_eq!(t.weighted_length(&weights), textbook_cost(&weights));
        assert!(prefix_free(&t));
    }

    proptest! {
        #[test]
        fn optimal_and_prefix_free(weights in prop::collection::vec(1u64..500, 2..64)) {
            let t = HuffmanTree::build(&weights).unwrap();
            prop_assert_eq!(t.weighted_length(&weights), textbook_cost(&weights));
            prop_assert!(prefix_free(&t));
            for leaf in 0..weights.len() as u32 {
                prop_assert!(!t.code(leaf).is_empty());
                prop_assert_eq!(t.code(leaf).len(), t.points(leaf).len());
                prop_assert_eq!(t.points(leaf)[0] as usize, weights.len() - 2);
            }
        }
    }
}
