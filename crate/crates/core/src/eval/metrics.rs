use crate::error::{Error, Result};

/// A gold call and the suggestions produced for its site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub gold: String,
    pub suggestions: Vec<String>,
}

impl Outcome {
    pub fn new(gold: impl Into<String>, suggestions: Vec<String>) -> Self {
        Self {
            gold: gold.into(),
            suggestions,
        }
    }

    /// 1-based rank of the gold call, `None` when absent.
    pub fn rank(&self) -> Option<usize> {
        self.suggestions.iter().position(|s| *s == self.gold).map(|i| i + 1)
    }
}

fn non_empty(results: &[Outcome]) -> Result<()> {
    if results.is_empty() {
        Err(Error::Empty("no results to score"))
    } else {
        Ok(())
    }
}

/// Fraction of results whose gold call is in the top `k`.
pub fn recall_at_k(results: &[Outcome], k: usize) -> Result<f64> {
    non_empty(results)?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let hits = results.iter().filter(|r| r.rank().is_some_and(|x| x <= k)).count();
    Ok(hits as f64 / results.len() as f64)
}

/// Mean reciprocal rank; an absent gold contributes 0.
pub fn mrr(results: &[Outcome]) -> Result<f64> {
    non_empty(results)?;
    let sum: f64 = results.iter().map(|r| r.rank().map_or(0.0, |x| 1.0 / x as f64)).sum();
    Ok(sum / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(rank: Option<usize>) -> Outcome {
        let mut s: Vec<String> = (0..10).map(|i| format!("x{i}")).collect();
        if let Some(r) = rank {
            s[r - 1] = "gold".into();
        }
        Outcome::new("gold", s)
    }

    #[test]
    fn perfect_and_empty() {
        let all_first: Vec<Outcome> = (0..5).map(|_| at(Some(1))).collect();
        assert_eq!(recall_at_k(&all_first, 1).unwrap(), 1.0);
        let none: Vec<Outcome> = (0..5).map(|_| at(None)).collect();
        assert_eq!(recall_at_k(&none, 10).unwrap(), 0.0);
        assert_eq!(mrr(&none).unwrap(), 0.0);
        assert!(matches!(recall_at_k(&[], 1), Err(Error::Empty(_))));
        assert!(mrr(&[]).is_err());
        assert!(recall_at_k(&all_first, 0).is_err());
    }

    #[test]
    fn rank_two_everywhere() {
        let r: Vec<Outcome> = (0..7).map(|_| at(Some(2))).collect();
        assert_eq!(mrr(&r).unwrap(), 0.5);
    }

    #[test]
    fn ranks_one_two_four() {
        let r = vec![at(Some(1)), at(Some(2)), at(Some(4))];
        assert!((mrr(&r).unwrap() - 1.75 / 3.0).abs() < 1e-15);
        assert!((recall_at_k(&r, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }
}
