//! PV-DBOW paragraph vectors over function sequences.

mod gradcheck;
mod hs;
mod huffman;
mod io;
mod pv;
mod similarity;

pub use gradcheck::{gradient_check, relative_error};
pub use hs::{hs_gradient_f64, hs_log_prob, hs_log_prob_f64, log_sigmoid, sigmoid};
pub use huffman::HuffmanTree;
pub use pv::{Doc, HyperParams, Inferred, PvModel};
pub use similarity::{cosine, SimilarityHit};

#[cfg(test)]
mod tests;
