use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::checked_pow;
use crate::space::Prior;
use crate::tree::AdaptedTree;

const SUM_TOL: f64 = 1e-12;

/// A probability on depth-`T` paths, in lexicographic path order.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMeasure {
    arity: usize,
    depth: usize,
    weights: Vec<f64>,
}

impl TruncatedMeasure {
    pub fn new(arity: usize, depth: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = checked_pow(arity, depth);
        if weights.len() as u128 != expected {
            return Err(Error::InvalidPrior(format!(
                "a depth-{depth} measure over {arity} states needs {expected} weights, found {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPrior("path weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidPrior(format!("path weights sum to {total}, not 1")));
        }
        Ok(Self { arity, depth, weights })
    }

    pub fn from_prior(prior: &Prior) -> Self {
        Self { arity: prior.len(), depth: 1, weights: prior.weights().to_vec() }
    }

    /// The unique measure on the empty path.
    pub fn trivial(arity: usize) -> Self {
        Self { arity, depth: 0, weights: alloc::vec![1.0] }
    }

    /// IID product `l (x) l (x) ..` up to `depth`.
    pub fn iid(prior: &Prior, depth: usize) -> Self {
        let mut m = Self::trivial(prior.len());
        for _ in 0..depth {
            let conts = alloc::vec![m.clone(); prior.len()];
            m = Self::paste(prior, &conts);
        }
        m
    }

    /// `P(s, rest) = root(s) * Q^s(rest)`.
    pub fn paste(root: &Prior, continuations: &[TruncatedMeasure]) -> Self {
        let n = root.len();
        debug_assert_eq!(continuations.len(), n);
        let depth = continuations[0].depth + 1;
        let mut weights = Vec::with_capacity(continuations[0].weights.len() * n);
        for (s, q) in continuations.iter().enumerate() {
            let r = root.weights()[s];
            weights.extend(q.weights.iter().map(|w| r * w));
        }
        Self { arity: n, depth, weights }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P_{+1}`: distribution of the first shock.
    pub fn first_marginal(&self) -> Prior {
        let block = self.weights.len() / self.arity;
        let w = (0..self.arity).map(|s| self.weights[s * block..(s + 1) * block].iter().sum()).collect();
        Prior::new(w).unwrap_or_else(|_| unreachable_prior(self.arity))
    }

    /// `P_s`: the conditional on the remaining shocks given first shock `s`;
    /// `None` when `P_{+1}(s) = 0`.
    pub fn conditional(&self, s: usize) -> Option<Self> {
        let block = self.weights.len() / self.arity;
        let slice = &self.weights[s * block..(s + 1) * block];
        let mass: f64 = slice.iter().sum();
        if mass <= 0.0 {
            return None;
        }
        Some(Self { arity: self.arity, depth: self.depth - 1, weights: slice.iter().map(|w| w / mass).collect() })
    }

    /// Marginal on the first `depth` shocks.
    pub fn truncate(&self, depth: usize) -> Self {
        debug_assert!(depth <= self.depth);
        let group = checked_pow(self.arity, self.depth - depth) as usize;
        Self {
            arity: self.arity,
            depth,
            weights: self.weights.chunks_exact(group).map(|c| c.iter().sum()).collect(),
        }
    }

    pub fn expectation(&self, xi: &AdaptedTree) -> f64 {
        debug_assert_eq!(xi.depth(), self.depth);
        self.weights.iter().zip(xi.values()).map(|(w, x)| w * x).sum()
    }
}

// Marginals of a validated measure always validate; keep a total fallback
// rather than panicking on rounding.
fn unreachable_prior(n: usize) -> Prior {
    Prior::uniform(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn product_structure() {
        let l = Prior::new(vec![0.3, 0.7]).unwrap();
        let p = TruncatedMeasure::iid(&l, 2);
        assert_eq!(p.weights().len(), 4);
        assert!((p.weights()[1] - 0.21).abs() < 1e-15);
        assert_eq!(p.first_marginal().weights(), l.weights());
        let c = p.conditional(1).unwrap();
        assert!((c.weights()[0] - 0.3).abs() < 1e-15);
        assert!((p.truncate(1).weights()[1] - 0.7).abs() < 1e-15);
        assert_eq!(p.truncate(0).weights(), &[1.0]);
    }

    #[test]
    fn zero_mass_branch_has_no_conditional() {
        let p = TruncatedMeasure::new(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(p.conditional(1).is_none());
        assert!(TruncatedMeasure::new(2, 2, vec![0.5, 0.5, 0.1, 0.0]).is_err());
    }
}
