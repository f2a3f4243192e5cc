pub mod candidates;
pub mod cli;
pub mod codec;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod ngram;
pub mod ranker;
pub mod synth;

pub use error::{Error, Result};
