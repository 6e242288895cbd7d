//! Variational certainty equivalents on a finite menu of priors, and the
//! entropic closed form.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, relative_entropy, simplex_grid, simplex_grid_len};
use crate::space::Prior;

/// Largest simplex grid built by [`VariationalTable::entropic_grid`].
pub const MAX_GRID_POINTS: u128 = 1_000_000;

const GROUNDED_TOL: f64 = 1e-9;

/// Priors paired with non-negative costs; `min_i E_{p_i}[xi] + c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalTable {
    priors: Vec<Prior>,
    costs: Vec<f64>,
}

impl VariationalTable {
    /// Costs must be finite, non-negative and grounded (smallest cost at most
    /// `1e-9`, which makes the functional normalized).
    pub fn new(priors: Vec<Prior>, costs: Vec<f64>) -> Result<Self> {
        if priors.is_empty() {
            return Err(Error::param("priors", "empty cost table"));
        }
        if priors.len() != costs.len() {
            return Err(Error::ArityMismatch { expected: priors.len(), found: costs.len() });
        }
        let n = priors[0].len();
        if priors.iter().any(|p| p.len() != n) {
            return Err(Error::param("priors", "priors have different lengths"));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::param("costs", "costs must be finite and non-negative"));
        }
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        if min > GROUNDED_TOL {
            return Err(Error::param("costs", "cost table is not grounded (min cost > 1e-9)"));
        }
        Ok(Self { priors, costs })
    }

    /// Relative-entropy cost `R(p || reference) / theta` on the simplex grid
    /// of mesh `1/m`. The reference itself is appended when it is not a grid
    /// point, so the table is always exactly grounded.
    pub fn entropic_grid(theta: f64, reference: &Prior, m: usize) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param("theta", "theta must be positive"));
        }
        if m < 2 {
            return Err(Error::param("mesh", "grid needs m >= 2"));
        }
        let n = reference.len();
        let size = simplex_grid_len(m, n);
        if size > MAX_GRID_POINTS {
            return Err(Error::CapExceeded { what: "simplex grid", size, cap: MAX_GRID_POINTS });
        }
        let mut priors = Vec::with_capacity(size as usize + 1);
        let mut costs = Vec::with_capacity(size as usize + 1);
        let mut has_reference = false;
        for p in simplex_grid(m, n) {
            let c = relative_entropy(&p, reference.weights()) / theta;
            if !c.is_finite() {
                continue;
            }
            has_reference |= c == 0.0;
            priors.push(Prior::new(p)?);
            costs.push(c);
        }
        if !has_reference {
            priors.push(reference.clone());
            costs.push(0.0);
        }
        Self::new(priors, costs)
    }

    pub fn priors(&self) -> &[Prior] {
        &self.priors
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn states(&self) -> usize {
        self.priors[0].len()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.priors.clone(), self.costs.iter().map(|c| c * factor).collect())
    }

    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        self.priors
            .iter()
            .zip(&self.costs)
            .map(|(p, c)| p.expectation(xi) + c)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `-(1/theta) log sum_s l(s) exp(-theta xi(s))`, shifted at the smallest
/// supported value for stability.
pub fn entropic(theta: f64, reference: &Prior, xi: &[f64]) -> f64 {
    let support = reference.weights().iter().zip(xi).filter(|(w, _)| **w > 0.0);
    let lo = support.clone().map(|(_, x)| *x).fold(f64::INFINITY, f64::min);
    let s: f64 = support.map(|(w, x)| w * exp(-theta * (x - lo))).sum();
    lo - ln(s) / theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn entropic_hand_value() {
        let v = entropic(1.0, &Prior::uniform(2), &[0.0, 1.0]);
        let expected = -libm::log((1.0 + libm::exp(-1.0)) / 2.0);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn grid_matches_closed_form() {
        let l = Prior::uniform(2);
        let table = VariationalTable::entropic_grid(1.0, &l, 200).unwrap();
        let xi = [0.0, 1.0];
        assert!((table.evaluate(&xi) - entropic(1.0, &l, &xi)).abs() <= 5e-3);
        assert_eq!(table.evaluate(&[0.3, 0.3]), 0.3);
    }

    #[test]
    fn tiny_theta_is_expectation() {
        let l = Prior::new(vec![0.25, 0.75]).unwrap();
        let table = VariationalTable::entropic_grid(1e-6, &l, 40).unwrap();
        let xi = [0.8, -0.4];
        assert!((table.evaluate(&xi) - l.expectation(&xi)).abs() <= 1e-4);
    }

    #[test]
    fn off_grid_reference_is_appended() {
        let l = Prior::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let table = VariationalTable::entropic_grid(2.0, &l, 10).unwrap();
        assert_eq!(table.priors().len(), 12);
        assert_eq!(table.evaluate(&[-0.2, -0.2]), -0.2);
    }

    #[test]
    fn rejects_large_or_ungrounded() {
        assert!(matches!(
            VariationalTable::entropic_grid(1.0, &Prior::uniform(4), 400),
            Err(Error::CapExceeded { .. })
        ));
        let p = vec![Prior::uniform(2)];
        assert!(VariationalTable::new(p, vec![0.5]).is_err());
    }
}
