//! Finite-difference validation of the hierarchical-softmax gradient.

use super::hs::{hs_gradient_f64, hs_log_prob_f64};
use super::huffman::HuffmanTree;
use super::PvModel;

pub const STEP: f64 = 1e-5;

/// Relative error with a floor on the denominator, so that gradients near
/// zero are compared in absolute terms.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-2)
}

/// Largest relative error between the analytic gradient of
/// `log P(word | context)` and central differences, over every context
/// coordinate and every coordinate of the node vectors on the word's path.
pub fn gradient_check(tree: &HuffmanTree, nodes: &[f64], dim: usize, context: &[f64], word: u32) -> f64 {
    let (d_ctx, d_nodes) = hs_gradient_f64(tree, nodes, dim, context, word);
    let mut worst = 0.0f64;

    let mut ctx = context.to_vec();
    for k in 0..dim {
        let x = ctx[k];
        ctx[k] = x + STEP;
        let hi = hs_log_prob_f64(tree, nodes, dim, &ctx, word);
        ctx[k] = x - STEP;
        let lo = hs_log_prob_f64(tree, nodes, dim, &ctx, word);
        ctx[k] = x;
        worst = worst.max(relative_error(d_ctx[k], (hi - lo) / (2.0 * STEP)));
    }

    let mut params = nodes.to_vec();
    for &n in tree.points(word) {
        for k in 0..dim {
            let i = n as usize * dim + k;
            let x = params[i];
            params[i] = x + STEP;
            let hi = hs_log_prob_f64(tree, &params, dim, context, word);
            params[i] = x - STEP;
            let lo = hs_log_prob_f64(tree, &params, dim, context, word);
            params[i] = x;
            worst = worst.max(relative_error(d_nodes[i], (hi - lo) / (2.0 * STEP)));
        }
    }
    worst
}

impl PvModel {
    /// [`gradient_check`] at a trained document vector, widened to f64.
    pub fn gradient_check(&self, doc_id: usize, word: u32) -> f64 {
        let nodes: Vec<f64> = self.node_vectors.iter().map(|&x| x as f64).collect();
        let ctx: Vec<f64> = self.doc_vector(doc_id).iter().map(|&x| x as f64).collect();
        gradient_check(&self.tree, &nodes, self.dim(), &ctx, word)
    }
}
