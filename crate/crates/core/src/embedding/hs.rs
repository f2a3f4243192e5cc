//! Hierarchical softmax: probabilities, SGD steps and analytic gradients.
//!
//! `log P(w | v) = Σ_{(n, b) on path(w)} log σ(s_b ⟨u_n, v⟩)` with
//! `s_0 = +1`, `s_1 = -1`. Since `σ(x) + σ(-x) = 1` at every internal node,
//! the leaf probabilities sum to one.

use std::sync::atomic::{AtomicU32, Ordering};

use super::huffman::HuffmanTree;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `log σ(x)` without overflow for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sign(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log P(word | context)` with node vectors stored row-major, `dim` wide.
pub fn hs_log_prob(tree: &HuffmanTree, nodes: &[f32], dim: usize, context: &[f32], word: u32) -> f64 {
    tree.points(word)
        .iter()
        .zip(tree.code(word))
        .map(|(&n, &bit)| {
            let row = &nodes[n as usize * dim..(n as usize + 1) * dim];
            let x: f64 = row.iter().zip(context).map(|(&a, &b)| a as f64 * b as f64).sum();
            log_sigmoid(sign(bit) * x)
        })
        .sum()
}

/// f64 twin of [`hs_log_prob`], used for gradient checking.
pub fn hs_log_prob_f64(tree: &HuffmanTree, nodes: &[f64], dim: usize, context: &[f64], word: u32) -> f64 {
    tree.points(word)
        .iter()
        .zip(tree.code(word))
        .map(|(&n, &bit)| {
            let row = &nodes[n as usize * dim..(n as usize + 1) * dim];
            let x: f64 = row.iter().zip(context).map(|(a, b)| a * b).sum();
            log_sigmoid(sign(bit) * x)
        })
        .sum()
}

/// Analytic gradient of [`hs_log_prob_f64`] with respect to the context
/// vector and to every node vector (rows off the path are zero).
pub fn hs_gradient_f64(
    tree: &HuffmanTree,
    nodes: &[f64],
    dim: usize,
    context: &[f64],
    word: u32,
) -> (Vec<f64>, Vec<f64>) {
    let mut d_ctx = vec![0.0; dim];
    let mut d_nodes = vec![0.0; nodes.len()];
    for (&n, &bit) in tree.points(word).iter().zip(tree.code(word)) {
        let n = n as usize;
        let row = &nodes[n * dim..(n + 1) * dim];
        let x: f64 = row.iter().zip(context).map(|(a, b)| a * b).sum();
        let s = sign(bit);
        // d/dx log σ(s x) = s (1 - σ(s x))
        let g = s * (1.0 - sigmoid(s * x));
        for k in 0..dim {
            d_ctx[k] += g * row[k];
            d_nodes[n * dim + k] += g * context[k];
        }
    }
    (d_ctx, d_nodes)
}

/// Row-major f32 matrix whose elements may be updated from several threads
/// without locking. Each element update is atomic; concurrent
/// read-modify-write sequences on the same element can lose updates.
pub(crate) struct SharedMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    pub fn from_vec(values: Vec<f32>, dim: usize) -> Self {
        Self {
            data: values.into_iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
            dim,
        }
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn load_row(&self, row: usize, out: &mut [f32]) {
        let base = row * self.dim;
        for (k, o) in out.iter_mut().enumerate() {
            *o = f32::from_bits(self.data[base + k].load(Ordering::Relaxed));
        }
    }

    pub fn store_row(&self, row: usize, v: &[f32]) {
        let base = row * self.dim;
        for (k, &x) in v.iter().enumerate() {
            self.data[base + k].store(x.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn add_scaled_row(&self, row: usize, scale: f32, v: &[f32]) {
        let base = row * self.dim;
        for (k, &x) in v.iter().enumerate() {
            let cell = &self.data[base + k];
            let cur = f32::from_bits(cell.load(Ordering::Relaxed));
            cell.store((cur + scale * x).to_bits(), Ordering::Relaxed);
        }
    }
}

/// One SGD step towards predicting `word` from `input`, updating the node
/// vectors on the word's path. The input gradient is accumulated in
/// `neu1e` (already scaled by `alpha`).
pub(crate) fn train_step(
    tree: &HuffmanTree,
    nodes: &SharedMatrix,
    input: &[f32],
    word: u32,
    alpha: f32,
    neu1e: &mut [f32],
    scratch: &mut [f32],
) {
    for (&n, &bit) in tree.points(word).iter().zip(tree.code(word)) {
        nodes.load_row(n as usize, scratch);
        let x = dot_f32(input, scratch);
        let f = sigmoid(x as f64) as f32;
        let label = if bit { 0.0 } else { 1.0 };
        let g = (label - f) * alpha;
        for (e, &u) in neu1e.iter_mut().zip(scratch.iter()) {
            *e += g * u;
        }
        nodes.add_scaled_row(n as usize, g, input);
    }
}

/// Like [`train_step`] but with frozen node vectors.
pub(crate) fn infer_step(
    tree: &HuffmanTree,
    nodes: &[f32],
    dim: usize,
    input: &[f32],
    word: u32,
    alpha: f32,
    neu1e: &mut [f32],
) {
    for (&n, &bit) in tree.points(word).iter().zip(tree.code(word)) {
        let row = &nodes[n as usize * dim..(n as usize + 1) * dim];
        let x = dot_f32(input, row);
        let f = sigmoid(x as f64) as f32;
        let label = if bit { 0.0 } else { 1.0 };
        let g = (label - f) * alpha;
        for (e, &u) in neu1e.iter_mut().zip(row) {
            *e += g * u;
        }
    }
}
