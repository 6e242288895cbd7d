//! Choquet and rank-dependent integrals on a finite state space.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, powf};
use crate::space::{Capacity, Prior};

/// State indices sorted by decreasing value; ties keep index order.
pub fn descending_order(xi: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]));
    order
}

/// Layer-cake evaluation along the chain of upper level sets.
///
/// With `x_(1) >= .. >= x_(n)` and `A_k` the top-`k` states,
/// `x_(n) + sum_{k<n} (x_(k) - x_(k+1)) * v(A_k)`. This is the split
/// `int_0^inf v(xi >= t) dt + int_-inf^0 (v(xi >= t) - 1) dt` evaluated on
/// the step function `t -> v(xi >= t)`.
fn layer_cake(xi: &[f64], mut chain_value: impl FnMut(usize, u32) -> f64) -> f64 {
    let order = descending_order(xi);
    let n = xi.len();
    let mut total = xi[order[n - 1]];
    let mut mask = 0u32;
    for k in 0..n - 1 {
        mask |= 1 << order[k];
        let gap = xi[order[k]] - xi[order[k + 1]];
        if gap != 0.0 {
            total += gap * chain_value(k, mask);
        }
    }
    total
}

pub fn choquet(capacity: &Capacity, xi: &[f64]) -> f64 {
    layer_cake(xi, |_, mask| capacity.value(mask))
}

/// Rank-dependent expected utility: the Choquet integral for the distorted
/// probability `g(l(A))`. Works for any state count (no subset table).
pub fn rank_dependent(prior: &Prior, g: &Distortion, xi: &[f64]) -> f64 {
    let order = descending_order(xi);
    let w = prior.weights();
    let n = xi.len();
    let mut total = xi[order[n - 1]];
    let mut cumulative = 0.0;
    for k in 0..n - 1 {
        cumulative += w[order[k]];
        let gap = xi[order[k]] - xi[order[k + 1]];
        if gap != 0.0 {
            total += gap * g.apply(cumulative.min(1.0));
        }
    }
    total
}

/// Probability distortion `g: [0,1] -> [0,1]`, increasing, `g(0) = 0`,
/// `g(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distortion {
    Identity,
    /// `p^gamma`; convex for `gamma > 1`, concave for `gamma < 1`.
    Power { gamma: f64 },
    /// Prelec weighting `exp(-(-ln p)^alpha)`; inverse-S shaped for
    /// `alpha < 1`.
    Prelec { alpha: f64 },
}

impl Distortion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distortion::Identity => Ok(()),
            Distortion::Power { gamma } if gamma.is_finite() && gamma > 0.0 => Ok(()),
            Distortion::Power { .. } => Err(Error::param("gamma", "power distortion needs gamma > 0")),
            Distortion::Prelec { alpha } if alpha.is_finite() && alpha > 0.0 => Ok(()),
            Distortion::Prelec { .. } => Err(Error::param("alpha", "Prelec distortion needs alpha > 0")),
        }
    }

    pub fn apply(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        match *self {
            Distortion::Identity => p,
            Distortion::Power { gamma } => powf(p, gamma),
            Distortion::Prelec { alpha } => exp(-powf(-ln(p), alpha)),
        }
    }

    /// The capacity `A -> g(l(A))`.
    pub fn capacity(&self, prior: &Prior) -> Result<Capacity> {
        let n = prior.len();
        if n > crate::space::MAX_CAPACITY_STATES {
            return Err(Error::CapExceeded {
                what: "capacity state count",
                size: n as u128,
                cap: crate::space::MAX_CAPACITY_STATES as u128,
            });
        }
        let values = (0..1u32 << n).map(|m| self.apply(prior.mass(m))).collect::<Vec<_>>();
        let mut values = values;
        values[0] = 0.0;
        values[(1usize << n) - 1] = 1.0;
        Capacity::new(n, values)
    }
}
