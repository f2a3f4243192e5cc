use std::cmp::Ordering;

use super::PvModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityHit {
    pub doc_id: usize,
    pub score: f64,
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Descending score, then ascending doc id.
pub(crate) fn hit_order(a: &SimilarityHit, b: &SimilarityHit) -> Ordering {
    b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id))
}

impl PvModel {
    /// Exact top-`k` training documents by cosine similarity to `query`.
    pub fn most_similar(&self, query: &[f32], k: usize) -> Result<Vec<SimilarityHit>> {
        let dim = self.dim();
        if query.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: query.len(),
            });
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroNormQuery);
        }
        let mut hits: Vec<SimilarityHit> = self
            .doc_vectors
            .chunks(dim)
            .zip(&self.norms)
            .enumerate()
            .map(|(doc_id, (row, &n))| SimilarityHit {
                doc_id,
                score: if n == 0.0 {
                    0.0
                } else {
                    (dot(query, row) / (qn * n)).clamp(-1.0, 1.0)
                },
            })
            .collect();
        if k < hits.len() {
            hits.select_nth_unstable_by(k - 1, hit_order);
            hits.truncate(k);
        }
        hits.sort_by(hit_order);
        Ok(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        let a = [1.0f32, 2.0, -1.0];
        let b = [0.5f32, -1.0, 3.0];
        let a2: Vec<f32> = a.iter().map(|x| 2.0 * x).collect();
        assert_eq!(cosine(&a, &b), cosine(&b, &a));
        assert!((cosine(&a2, &b) - cosine(&a, &b)).abs() < 1e-12);
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&a, &[0.0; 3]), 0.0);
    }
}
