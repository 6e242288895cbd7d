//! One-step-ahead certainty equivalents `I: R^S -> R`.
//!
//! [`CeSpec`] is the closed menu of models (expectation, maxmin,
//! variational, entropic, Choquet, rank-dependent, smooth). Anything else
//! implementing [`CertaintyEquivalent`] plugs into the solvers and probes as
//! well.
//!
//! Arguments may leave `[-1, 1]`: the solvers feed `I0(xi^s) / beta` into
//! `I+1`. Every menu model is defined on all of `R` except smooth models
//! with a power transform, which need `x >= -shift` (the default shift
//! covers the documented working domain `[-3, 3]`).

mod choquet;
mod probe;
mod smooth;
mod variational;

use alloc::vec::Vec;

pub use choquet::{choquet, descending_order, rank_dependent, Distortion};
pub use probe::{probe_properties, ti_counterexample_search, PropertyCheck, PropertyReport, TiWitness, PASS_TOL};
pub use smooth::{smooth, CustomPhi, Phi, DEFAULT_POWER_SHIFT};
pub use variational::{entropic, VariationalTable, MAX_GRID_POINTS};

use crate::error::{Error, Result};
use crate::space::{Capacity, Prior};

/// A monotone, normalized functional on real vectors indexed by states.
pub trait CertaintyEquivalent {
    /// Number of states `|S|`.
    fn arity(&self) -> usize;

    /// Evaluates without checking the argument length.
    fn evaluate_unchecked(&self, xi: &[f64]) -> Result<f64>;

    /// Whether the functional is known to satisfy `I(xi + k) = I(xi) + k`.
    fn is_translation_invariant(&self) -> bool;

    fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: xi.len() });
        }
        if let Some(&x) = xi.iter().find(|x| !x.is_finite()) {
            return Err(Error::OutOfRange { what: "argument", value: x, lo: f64::NEG_INFINITY, hi: f64::INFINITY });
        }
        self.evaluate_unchecked(xi)
    }
}

impl<C: CertaintyEquivalent + ?Sized> CertaintyEquivalent for &C {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn evaluate_unchecked(&self, xi: &[f64]) -> Result<f64> {
        (**self).evaluate_unchecked(xi)
    }
    fn is_translation_invariant(&self) -> bool {
        (**self).is_translation_invariant()
    }
}

/// The model menu. Build through the validating constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum CeSpec {
    Expectation(Prior),
    Maxmin(Vec<Prior>),
    Variational(VariationalTable),
    Entropic { theta: f64, reference: Prior },
    Choquet(Capacity),
    RankDependent { prior: Prior, distortion: Distortion },
    Smooth { support: Vec<Prior>, weights: Prior, phi: Phi },
}

impl CeSpec {
    pub fn expectation(prior: Prior) -> Self {
        CeSpec::Expectation(prior)
    }

    pub fn maxmin(priors: Vec<Prior>) -> Result<Self> {
        same_arity(&priors)?;
        Ok(CeSpec::Maxmin(priors))
    }

    pub fn variational(table: VariationalTable) -> Self {
        CeSpec::Variational(table)
    }

    pub fn entropic(theta: f64, reference: Prior) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param("theta", "entropic model needs theta > 0"));
        }
        Ok(CeSpec::Entropic { theta, reference })
    }

    pub fn choquet(capacity: Capacity) -> Self {
        CeSpec::Choquet(capacity)
    }

    pub fn rank_dependent(prior: Prior, distortion: Distortion) -> Result<Self> {
        distortion.validate()?;
        Ok(CeSpec::RankDependent { prior, distortion })
    }

    pub fn smooth(support: Vec<Prior>, weights: Prior, phi: Phi) -> Result<Self> {
        same_arity(&support)?;
        if weights.len() != support.len() {
            return Err(Error::param("weights", "second-order weights must match the support size"));
        }
        phi.validate()?;
        Ok(CeSpec::Smooth { support, weights, phi })
    }

    /// Variational model approximating the entropic one: cost
    /// `R(p || reference) / theta` on the simplex grid of mesh `1/m`.
    pub fn variational_from_entropic(theta: f64, reference: &Prior, m: usize) -> Result<Self> {
        Ok(CeSpec::Variational(VariationalTable::entropic_grid(theta, reference, m)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CeSpec::Expectation(_) => "expectation",
            CeSpec::Maxmin(_) => "maxmin",
            CeSpec::Variational(_) => "variational_grid",
            CeSpec::Entropic { .. } => "entropic",
            CeSpec::Choquet(_) => "choquet",
            CeSpec::RankDependent { .. } => "rank_dependent",
            CeSpec::Smooth { .. } => "smooth",
        }
    }

    /// True when the second-order prior of a smooth model puts positive
    /// mass on at least two distinct first-order priors.
    pub fn is_nondegenerate_smooth(&self) -> bool {
        match self {
            CeSpec::Smooth { support, weights, .. } => {
                let charged: Vec<&Prior> =
                    support.iter().zip(weights.weights()).filter(|(_, &w)| w > 0.0).map(|(p, _)| p).collect();
                charged.iter().any(|p| *p != charged[0])
            }
            _ => false,
        }
    }
}

fn same_arity(priors: &[Prior]) -> Result<()> {
    let first = priors.first().ok_or_else(|| Error::param("priors", "empty prior set"))?;
    if priors.iter().any(|p| p.len() != first.len()) {
        return Err(Error::param("priors", "priors have different lengths"));
    }
    Ok(())
}

impl CertaintyEquivalent for CeSpec {
    fn arity(&self) -> usize {
        match self {
            CeSpec::Expectation(p) => p.len(),
            CeSpec::Maxmin(ps) => ps[0].len(),
            CeSpec::Variational(t) => t.states(),
            CeSpec::Entropic { reference, .. } => reference.len(),
            CeSpec::Choquet(v) => v.states(),
            CeSpec::RankDependent { prior, .. } => prior.len(),
            CeSpec::Smooth { support, .. } => support[0].len(),
        }
    }

    fn evaluate_unchecked(&self, xi: &[f64]) -> Result<f64> {
        Ok(match self {
            CeSpec::Expectation(p) => p.expectation(xi),
            CeSpec::Maxmin(ps) => ps.iter().map(|p| p.expectation(xi)).fold(f64::INFINITY, f64::min),
            CeSpec::Variational(t) => t.evaluate(xi),
            CeSpec::Entropic { theta, reference } => entropic(*theta, reference, xi),
            CeSpec::Choquet(v) => choquet(v, xi),
            CeSpec::RankDependent { prior, distortion } => rank_dependent(prior, distortion, xi),
            CeSpec::Smooth { support, weights, phi } => smooth(support, weights, phi, xi)?,
        })
    }

    fn is_translation_invariant(&self) -> bool {
        match self {
            CeSpec::Smooth { phi, .. } => phi.is_exponential_family() || !self.is_nondegenerate_smooth(),
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(w: &[f64]) -> Prior {
        Prior::new(w.to_vec()).unwrap()
    }

    #[test]
    fn menu_examples() {
        let e = CeSpec::expectation(Prior::uniform(2));
        assert_eq!(e.evaluate(&[1.0, -1.0]).unwrap(), 0.0);

        let mm = CeSpec::maxmin(vec![p(&[0.3, 0.7]), p(&[0.7, 0.3])]).unwrap();
        assert!((mm.evaluate(&[1.0, 0.0]).unwrap() - 0.3).abs() < 1e-15);

        let ch = CeSpec::choquet(Capacity::new(2, vec![0.0, 0.2, 0.3, 1.0]).unwrap());
        assert!((ch.evaluate(&[1.0, 0.0]).unwrap() - 0.2).abs() < 1e-15);

        let en = CeSpec::entropic(1.0, Prior::uniform(2)).unwrap();
        let expected = -libm::log((1.0 + libm::exp(-1.0)) / 2.0);
        assert!((en.evaluate(&[0.0, 1.0]).unwrap() - expected).abs() < 1e-15);

        let l = p(&[0.35, 0.65]);
        for phi in [Phi::Linear, Phi::Exponential { theta: 2.0 }, Phi::power(0.5)] {
            let sm = CeSpec::smooth(vec![l.clone()], p(&[1.0]), phi).unwrap();
            assert!((sm.evaluate(&[0.4, -0.9]).unwrap() - l.expectation(&[0.4, -0.9])).abs() < 1e-15);
        }
    }

    #[test]
    fn errors() {
        let e = CeSpec::expectation(Prior::uniform(3));
        assert_eq!(e.evaluate(&[0.0, 1.0]), Err(Error::ArityMismatch { expected: 3, found: 2 }));
        assert!(e.evaluate(&[0.0, f64::NAN, 1.0]).is_err());
        assert!(CeSpec::maxmin(vec![]).is_err());
        assert!(CeSpec::maxmin(vec![Prior::uniform(2), Prior::uniform(3)]).is_err());
        assert!(CeSpec::entropic(0.0, Prior::uniform(2)).is_err());
        assert!(CeSpec::smooth(vec![Prior::uniform(2)], Prior::uniform(2), Phi::Linear).is_err());
        assert!(CeSpec::rank_dependent(Prior::uniform(2), Distortion::Prelec { alpha: -0.5 }).is_err());
    }

    #[test]
    fn translation_invariance_flags() {
        let supp = vec![p(&[0.3, 0.7]), p(&[0.7, 0.3])];
        let power = CeSpec::smooth(supp.clone(), Prior::uniform(2), Phi::power(0.5)).unwrap();
        assert!(!power.is_translation_invariant());
        let degenerate = CeSpec::smooth(supp.clone(), p(&[1.0, 0.0]), Phi::power(0.5)).unwrap();
        assert!(degenerate.is_translation_invariant());
        let exp = CeSpec::smooth(supp, Prior::uniform(2), Phi::Exponential { theta: 1.0 }).unwrap();
        assert!(exp.is_translation_invariant());
    }
}
