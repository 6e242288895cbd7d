//! Finite shock spaces, priors, capacities and the utility normalization.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest state count for which set functions are tabulated over all
/// `2^n` subsets.
pub const MAX_CAPACITY_STATES: usize = 20;

const PRIOR_SUM_TOL: f64 = 1e-12;
const CAPACITY_TOL: f64 = 1e-12;

/// The per-period state set `S`, with a fixed index order.
///
/// Subsets of `S` are bitmasks over state indices (bit `i` is state `i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShockSpace {
    labels: Vec<String>,
}

impl ShockSpace {
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::TooFewStates(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Canonical text key of a subset: labels concatenated in index order.
    pub fn subset_key(&self, mask: u32) -> String {
        let mut key = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            if mask & (1 << i) != 0 {
                key.push_str(l);
            }
        }
        key
    }

    pub fn full_mask(&self) -> u32 {
        full_mask(self.len())
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A probability vector over `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    weights: Vec<f64>,
}

impl Prior {
    /// Validates non-negativity and unit mass (within `1e-12`).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPrior("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidPrior(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::InvalidPrior(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: alloc::vec![1.0 / n as f64; n] }
    }

    /// Point mass on state `s` of an `n`-state space.
    pub fn dirac(n: usize, s: usize) -> Self {
        let mut weights = alloc::vec![0.0; n];
        weights[s] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn expectation(&self, xi: &[f64]) -> f64 {
        self.weights.iter().zip(xi).map(|(w, x)| w * x).sum()
    }

    /// Probability of the subset encoded by `mask`.
    pub fn mass(&self, mask: u32) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, w)| w)
            .sum()
    }
}

/// A monotone, normalized set function `v: 2^S -> [0, 1]`, tabulated by
/// bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    n: usize,
    values: Vec<f64>,
}

impl Capacity {
    /// Builds a capacity from its values on all `2^n` subsets (indexed by
    /// bitmask). Monotonicity is checked along every single-state inclusion,
    /// which covers every `A ⊆ B` by transitivity.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        if n > MAX_CAPACITY_STATES {
            return Err(Error::CapExceeded {
                what: "capacity state count",
                size: n as u128,
                cap: MAX_CAPACITY_STATES as u128,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::InvalidCapacity(format!("expected {} subset values, found {}", 1usize << n, values.len())));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidCapacity(format!("v(empty) = {}, must be 0", values[0])));
        }
        let full = full_mask(n) as usize;
        if (values[full] - 1.0).abs() > CAPACITY_TOL {
            return Err(Error::InvalidCapacity(format!("v(S) = {}, must be 1", values[full])));
        }
        for (mask, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0 + CAPACITY_TOL).contains(&v) {
                return Err(Error::InvalidCapacity(format!("value {v} on subset {mask:#b} outside [0, 1]")));
            }
            for i in 0..n {
                let bigger = mask | (1 << i);
                if bigger != mask && values[bigger] + CAPACITY_TOL < v {
                    return Err(Error::InvalidCapacity(format!(
                        "not monotone: v({mask:#b}) = {v} > v({bigger:#b}) = {}",
                        values[bigger]
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// The additive capacity induced by a prior.
    pub fn from_prior(prior: &Prior) -> Result<Self> {
        let n = prior.len();
        Self::tabulate(n, |mask| prior.mass(mask))
    }

    /// Lower envelope `A -> min over priors of l(A)`.
    pub fn lower_envelope(priors: &[Prior]) -> Result<Self> {
        let n = priors.first().map(Prior::len).ok_or_else(|| Error::param("priors", "empty prior set"))?;
        if priors.iter().any(|p| p.len() != n) {
            return Err(Error::param("priors", "priors have different lengths"));
        }
        Self::tabulate(n, |mask| priors.iter().map(|p| p.mass(mask)).fold(f64::INFINITY, f64::min))
    }

    fn tabulate(n: usize, f: impl Fn(u32) -> f64) -> Result<Self> {
        if n > MAX_CAPACITY_STATES {
            return Err(Error::CapExceeded {
                what: "capacity state count",
                size: n as u128,
                cap: MAX_CAPACITY_STATES as u128,
            });
        }
        let full = full_mask(n);
        let mut values: Vec<f64> = (0..1u32 << n).map(&f).collect();
        values[0] = 0.0;
        values[full as usize] = 1.0;
        Self::new(n, values)
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Supermodularity: `v(A ∪ B) + v(A ∩ B) >= v(A) + v(B)` for all pairs.
    pub fn is_convex(&self) -> bool {
        self.pairs().all(|(a, b)| self.value(a | b) + self.value(a & b) + CAPACITY_TOL >= self.value(a) + self.value(b))
    }

    /// Submodularity.
    pub fn is_concave(&self) -> bool {
        self.pairs().all(|(a, b)| self.value(a | b) + self.value(a & b) <= self.value(a) + self.value(b) + CAPACITY_TOL)
    }

    pub fn is_additive(&self) -> bool {
        self.is_convex() && self.is_concave()
    }

    fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let m = 1u32 << self.n;
        (0..m).flat_map(move |a| (0..m).map(move |b| (a, b)))
    }
}

/// Discount factor together with the utility normalization: per-period
/// utilities in `[beta - 1, 1 - beta]`, lifetime utilities in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountedUtilityScale {
    beta: f64,
}

impl DiscountedUtilityScale {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::BetaRange(beta));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Bound `1 - beta` on the absolute value of per-period utilities.
    pub fn period_bound(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn lifetime_bound(&self) -> f64 {
        1.0
    }
}

/// Utility of a finite lottery under an affine utility: `sum p_i u(c_i)`.
///
/// Convenience for users who start from consumption lotteries instead of
/// per-period utilities.
pub fn lottery_utility(probabilities: &[f64], utilities: &[f64]) -> Result<f64> {
    if probabilities.len() != utilities.len() {
        return Err(Error::ArityMismatch { expected: probabilities.len(), found: utilities.len() });
    }
    let prior = Prior::new(probabilities.to_vec())?;
    Ok(prior.expectation(utilities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn shock_space_validation() {
        assert!(ShockSpace::new(["a"]).is_err());
        assert_eq!(ShockSpace::new(["a", "a"]), Err(Error::DuplicateLabel("a".into())));
        let s = ShockSpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(s.subset_key(0b101), "ac");
        assert_eq!(s.index_of("b"), Some(1));
    }

    #[test]
    fn prior_validation() {
        assert!(Prior::new(vec![0.5, 0.6]).is_err());
        assert!(Prior::new(vec![-0.1, 1.1]).is_err());
        let p = Prior::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.mass(0b10), 0.75);
        assert_eq!(p.expectation(&[1.0, -1.0]), -0.5);
    }

    #[test]
    fn capacity_validation() {
        // v({a}) = 0.2, v({b}) = 0.3
        let v = Capacity::new(2, vec![0.0, 0.2, 0.3, 1.0]).unwrap();
        assert!(v.is_convex());
        assert!(!v.is_concave());
        assert!(Capacity::new(2, vec![0.0, 0.2, 0.3, 0.9]).is_err());
        assert!(Capacity::new(2, vec![0.1, 0.2, 0.3, 1.0]).is_err());
        let non_monotone = Capacity::new(3, vec![0.0, 0.5, 0.1, 0.4, 0.2, 0.6, 0.3, 1.0]);
        assert!(matches!(non_monotone, Err(Error::InvalidCapacity(_))));
        let additive = Capacity::from_prior(&Prior::new(vec![0.2, 0.3, 0.5]).unwrap()).unwrap();
        assert!(additive.is_additive());
    }

    #[test]
    fn beta_range() {
        assert_eq!(DiscountedUtilityScale::new(1.2), Err(Error::BetaRange(1.2)));
        assert!(DiscountedUtilityScale::new(0.0).is_err());
        let s = DiscountedUtilityScale::new(0.9).unwrap();
        assert!((s.period_bound() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lottery_helper() {
        assert_eq!(lottery_utility(&[0.5, 0.5], &[0.1, -0.1]).unwrap(), 0.0);
    }
}
