//! Finite-horizon law-of-large-numbers experiments under a rectangular set
//! of path measures.
//!
//! Long-run averages of `xi(s_t)` are bracketed by the Choquet integrals
//! `[int xi dnu, -int -xi dnu]` of the lower envelope `nu`. The experiment
//! draws paths period by period from vertices picked by a selection rule and
//! records how often the running average lies in the bracket widened by
//! `epsilon`. Only finite horizons are simulated; the tail event itself is
//! out of reach.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cequiv::choquet;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::space::{Capacity, Prior};

/// `(int xi dv, -int -xi dv)`.
pub fn choquet_bounds(capacity: &Capacity, xi: &[f64]) -> Result<(f64, f64)> {
    if xi.len() != capacity.states() {
        return Err(Error::ArityMismatch { expected: capacity.states(), found: xi.len() });
    }
    let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
    Ok((choquet(capacity, xi), -choquet(capacity, &neg)))
}

/// Bounds for the lower envelope `nu(A) = min_l l(A)` of `priors`.
pub fn choquet_bounds_from_priors(priors: &[Prior], xi: &[f64]) -> Result<(f64, f64)> {
    choquet_bounds(&Capacity::lower_envelope(priors)?, xi)
}

/// How the vertex of each period is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    /// Always the same vertex: an IID product measure.
    FixedVertex(usize),
    /// A uniformly drawn vertex, independently every period.
    PerPeriodRandom,
    /// The vertex with the smallest mean of `xi`.
    AdversarialLow,
    /// The vertex with the largest mean of `xi`.
    AdversarialHigh,
}

impl SelectionRule {
    pub fn label(&self) -> String {
        match self {
            SelectionRule::FixedVertex(i) => format!("fixed_vertex({i})"),
            SelectionRule::PerPeriodRandom => "per_period_random".into(),
            SelectionRule::AdversarialLow => "adversarial_low".into(),
            SelectionRule::AdversarialHigh => "adversarial_high".into(),
        }
    }

    /// Expected running average at every horizon, when the rule picks the
    /// same vertex every period.
    pub fn exact_mean(&self, priors: &[Prior], xi: &[f64]) -> Option<f64> {
        match self {
            SelectionRule::PerPeriodRandom => None,
            _ => Some(priors[self.fixed_choice(priors, xi)?].expectation(xi)),
        }
    }

    fn fixed_choice(&self, priors: &[Prior], xi: &[f64]) -> Option<usize> {
        let means = priors.iter().map(|p| p.expectation(xi));
        match self {
            SelectionRule::FixedVertex(i) => Some(*i),
            SelectionRule::PerPeriodRandom => None,
            // first vertex wins ties
            SelectionRule::AdversarialLow => {
                means.enumerate().fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
                    Some((_, b)) if b <= m => best,
                    _ => Some((i, m)),
                })
            }
            .map(|(i, _)| i),
            SelectionRule::AdversarialHigh => {
                means.enumerate().fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
                    Some((_, b)) if b >= m => best,
                    _ => Some((i, m)),
                })
            }
            .map(|(i, _)| i),
        }
    }
}

/// Draws shock paths from the vertices `priors` under a selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSampler {
    priors: Vec<Prior>,
    rule: SelectionRule,
}

impl PathSampler {
    pub fn new(priors: Vec<Prior>, rule: SelectionRule) -> Result<Self> {
        let first = priors.first().ok_or_else(|| Error::param("priors", "empty vertex set"))?;
        if priors.iter().any(|p| p.len() != first.len()) {
            return Err(Error::param("priors", "priors have different lengths"));
        }
        if let SelectionRule::FixedVertex(i) = rule {
            if i >= priors.len() {
                return Err(Error::param("rule", format!("vertex {i} does not exist")));
            }
        }
        Ok(Self { priors, rule })
    }

    pub fn priors(&self) -> &[Prior] {
        &self.priors
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    /// Running averages of `xi` along one path, read off at `horizons`.
    pub fn running_averages(&self, xi: &[f64], horizons: &[usize], rng: &mut Rng) -> Vec<f64> {
        let fixed = self.rule.fixed_choice(&self.priors, xi);
        let last = horizons.iter().copied().max().unwrap_or(0);
        let mut at = alloc::vec![0.0; horizons.len()];
        let mut sum = 0.0;
        for t in 1..=last {
            let vertex = match fixed {
                Some(i) => i,
                None => rng::index(rng, self.priors.len()),
            };
            sum += xi[draw(&self.priors[vertex], rng)];
            for (slot, &h) in at.iter_mut().zip(horizons) {
                if h == t {
                    *slot = sum / t as f64;
                }
            }
        }
        at
    }
}

fn draw(prior: &Prior, rng: &mut Rng) -> usize {
    let u = rng::unit(rng);
    let mut acc = 0.0;
    let w = prior.weights();
    for (s, p) in w.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // rounding left u above the total; take the last charged state
    w.iter().rposition(|p| *p > 0.0).unwrap_or(w.len() - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub rule: String,
    pub horizon: usize,
    pub trials: usize,
    /// Share of trials whose running average lies in `[lower - eps, upper + eps]`.
    pub frequency: f64,
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub rows: Vec<CoverageRow>,
    /// Smallest frequency over all rules and horizons.
    pub worst_frequency: f64,
}

/// Runs `trials` paths per rule. Trial `k` of rule `r` uses the sub-stream
/// `(r << 32) | k` of `seed`, so results do not depend on evaluation order.
pub fn coverage_experiment(
    priors: &[Prior],
    rules: &[SelectionRule],
    xi: &[f64],
    epsilon: f64,
    horizons: &[usize],
    trials: usize,
    seed: u64,
) -> Result<CoverageTable> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", "epsilon must be positive"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::param("horizons", "horizons must be a non-empty list of positive integers"));
    }
    let (lower, upper) = choquet_bounds_from_priors(priors, xi)?;
    let mut rows = Vec::with_capacity(rules.len() * horizons.len());
    for (r, &rule) in rules.iter().enumerate() {
        let sampler = PathSampler::new(priors.to_vec(), rule)?;
        let mut hits = alloc::vec![0usize; horizons.len()];
        for k in 0..trials {
            let mut rng = rng::substream(seed, ((r as u64) << 32) | k as u64);
            for (hit, avg) in hits.iter_mut().zip(sampler.running_averages(xi, horizons, &mut rng)) {
                if avg >= lower - epsilon && avg <= upper + epsilon {
                    *hit += 1;
                }
            }
        }
        for (&horizon, &hit) in horizons.iter().zip(&hits) {
            rows.push(CoverageRow {
                rule: rule.label(),
                horizon,
                trials,
                frequency: hit as f64 / trials as f64,
                lower,
                upper,
                epsilon,
                seed,
            });
        }
    }
    let worst_frequency = rows.iter().map(|r| r.frequency).fold(1.0, f64::min);
    Ok(CoverageTable { rows, worst_frequency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pair() -> Vec<Prior> {
        vec![Prior::new(vec![0.4, 0.6]).unwrap(), Prior::new(vec![0.6, 0.4]).unwrap()]
    }

    #[test]
    fn bounds() {
        let (lo, hi) = choquet_bounds_from_priors(&pair(), &[1.0, 0.0]).unwrap();
        assert!((lo - 0.4).abs() < 1e-15 && (hi - 0.6).abs() < 1e-15);
        let (lo, hi) = choquet_bounds_from_priors(&pair(), &[0.3, 0.3]).unwrap();
        assert_eq!((lo, hi), (0.3, 0.3));
        let l = Prior::new(vec![0.2, 0.5, 0.3]).unwrap();
        let (lo, hi) = choquet_bounds_from_priors(&[l.clone()], &[0.1, -0.4, 0.9]).unwrap();
        let e = l.expectation(&[0.1, -0.4, 0.9]);
        assert!((lo - e).abs() < 1e-15 && (hi - e).abs() < 1e-15);
    }

    #[test]
    fn adversarial_rules_pick_extreme_vertices() {
        let xi = [1.0, 0.0];
        assert_eq!(SelectionRule::AdversarialLow.exact_mean(&pair(), &xi), Some(0.4));
        assert_eq!(SelectionRule::AdversarialHigh.exact_mean(&pair(), &xi), Some(0.6));
        assert_eq!(SelectionRule::PerPeriodRandom.exact_mean(&pair(), &xi), None);
    }

    #[test]
    fn full_width_epsilon_always_covers() {
        let rules = [SelectionRule::PerPeriodRandom, SelectionRule::AdversarialLow];
        let t = coverage_experiment(&pair(), &rules, &[1.0, 0.0], 1.0, &[1, 5, 50], 20, 4).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.worst_frequency, 1.0);
    }

    #[test]
    fn reproducible() {
        let rules = [SelectionRule::FixedVertex(1), SelectionRule::PerPeriodRandom];
        let a = coverage_experiment(&pair(), &rules, &[1.0, 0.0], 0.05, &[10, 100], 30, 8).unwrap();
        let b = coverage_experiment(&pair(), &rules, &[1.0, 0.0], 0.05, &[10, 100], 30, 8).unwrap();
        assert_eq!(a, b);
        assert!(PathSampler::new(pair(), SelectionRule::FixedVertex(2)).is_err());
    }
}
