//! Randomized probes of the axioms a certainty equivalent may satisfy.

use alloc::vec::Vec;

use super::CertaintyEquivalent;
use crate::error::Result;
use crate::rng::{self, Rng};

/// A property passes when its worst sampled violation is at most this.
pub const PASS_TOL: f64 = 1e-9;

const SWEEP_POINTS: usize = 21;
const REFINE_POINTS: usize = 11;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    /// Largest violation seen (0 when never violated).
    pub violation: f64,
    /// Argument attaining the largest violation.
    pub witness: Vec<f64>,
}

impl PropertyCheck {
    fn new() -> Self {
        Self { violation: 0.0, witness: Vec::new() }
    }

    fn record(&mut self, violation: f64, witness: impl FnOnce() -> Vec<f64>) {
        if violation > self.violation {
            self.violation = violation;
            self.witness = witness();
        }
    }

    pub fn passes(&self) -> bool {
        self.violation <= PASS_TOL
    }
}

/// Worst translation-invariance violation `|I(xi + k) - I(xi) - k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiWitness {
    pub xi: Vec<f64>,
    pub k: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub samples: usize,
    pub seed: u64,
    pub monotone: PropertyCheck,
    pub normalized: PropertyCheck,
    pub translation_invariant: PropertyCheck,
    pub positively_homogeneous: PropertyCheck,
    pub concave: PropertyCheck,
    /// Worst case found by the deterministic grid sweep (and the random
    /// samples), with its shift `k`.
    pub ti_witness: TiWitness,
}

/// Samples `xi, eta` uniformly from `[-1, 1]^n`, `k` from `[-1, 1]` and
/// `alpha` from `[0, 1]`, and records the largest violation of
///
/// * monotonicity: `I(xi) <= I(xi + d)` for `d >= 0` (entries of `d` in `[0, 1]`),
/// * normalization: `I(k) = k`,
/// * translation invariance: `I(xi + k) = I(xi) + k`,
/// * positive homogeneity: `I(alpha xi) = alpha I(xi)`,
/// * concavity: `I(alpha xi + (1 - alpha) eta) >= alpha I(xi) + (1 - alpha) I(eta)`.
///
/// Translation invariance is additionally checked on a deterministic grid
/// sweep (see [`ti_counterexample_search`]).
pub fn probe_properties<C: CertaintyEquivalent + ?Sized>(ce: &C, samples: usize, seed: u64) -> Result<PropertyReport> {
    let n = ce.arity();
    let mut rng = rng::seeded(seed);
    let mut monotone = PropertyCheck::new();
    let mut normalized = PropertyCheck::new();
    let mut ti = PropertyCheck::new();
    let mut homogeneous = PropertyCheck::new();
    let mut concave = PropertyCheck::new();
    let mut best_ti = TiWitness { xi: alloc::vec![0.0; n], k: 0.0, violation: 0.0 };

    for _ in 0..samples.max(1) {
        let xi = draw(&mut rng, n);
        let eta = draw(&mut rng, n);
        let k = rng::uniform(&mut rng, -1.0, 1.0);
        let alpha = rng::unit(&mut rng);
        let up: Vec<f64> = xi
            .iter()
            .map(|x| if rng::unit(&mut rng) < 0.5 { x + rng::unit(&mut rng) } else { *x })
            .collect();

        let i_xi = ce.evaluate(&xi)?;
        let i_eta = ce.evaluate(&eta)?;

        monotone.record(i_xi - ce.evaluate(&up)?, || concat(&xi, &up));

        let constant = alloc::vec![k; n];
        normalized.record((ce.evaluate(&constant)? - k).abs(), || constant.clone());

        let shifted: Vec<f64> = xi.iter().map(|x| x + k).collect();
        let v = (ce.evaluate(&shifted)? - i_xi - k).abs();
        ti.record(v, || {
            let mut w = xi.clone();
            w.push(k);
            w
        });
        if v > best_ti.violation {
            best_ti = TiWitness { xi: xi.clone(), k, violation: v };
        }

        let scaled: Vec<f64> = xi.iter().map(|x| alpha * x).collect();
        homogeneous.record((ce.evaluate(&scaled)? - alpha * i_xi).abs(), || {
            let mut w = xi.clone();
            w.push(alpha);
            w
        });

        let mix: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        concave.record(alpha * i_xi + (1.0 - alpha) * i_eta - ce.evaluate(&mix)?, || concat(&xi, &eta));
    }

    let swept = ti_counterexample_search(ce)?;
    if swept.violation > best_ti.violation {
        ti.record(swept.violation, || {
            let mut w = swept.xi.clone();
            w.push(swept.k);
            w
        });
        best_ti = swept;
    }

    Ok(PropertyReport {
        samples,
        seed,
        monotone,
        normalized,
        translation_invariant: ti,
        positively_homogeneous: homogeneous,
        concave,
        ti_witness: best_ti,
    })
}

/// Deterministic search for a translation-invariance counterexample.
///
/// Sweeps the first two coordinates of `xi` (others held at 0) and the shift
/// `k` over a 21-point grid on `[-1, 1]`, then refines once on an 11-point
/// grid spanning one coarse step around the worst point.
pub fn ti_counterexample_search<C: CertaintyEquivalent + ?Sized>(ce: &C) -> Result<TiWitness> {
    let n = ce.arity();
    let dims = n.min(2);
    let coarse = 2.0 / (SWEEP_POINTS - 1) as f64;
    let mut best = TiWitness { xi: alloc::vec![0.0; n], k: 0.0, violation: 0.0 };

    let grid = |center: &[f64], half: f64, points: usize| -> Vec<Vec<f64>> {
        // one axis per swept coordinate of xi, plus k
        center
            .iter()
            .map(|&c| {
                (0..points)
                    .map(|i| {
                        let t = if points == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (points - 1) as f64 };
                        (c + t).clamp(-1.0, 1.0)
                    })
                    .collect()
            })
            .collect()
    };

    let search = |axes: Vec<Vec<f64>>, best: &mut TiWitness| -> Result<()> {
        let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut xi = alloc::vec![0.0; n];
        for idx in 0..total {
            let mut rest = idx;
            let mut point = [0.0; 3];
            for (a, axis) in axes.iter().enumerate().rev() {
                point[a] = axis[rest % axis.len()];
                rest /= axis.len();
            }
            xi[..dims].copy_from_slice(&point[..dims]);
            let k = point[dims];
            let shifted: Vec<f64> = xi.iter().map(|x| x + k).collect();
            let v = (ce.evaluate(&shifted)? - ce.evaluate(&xi)? - k).abs();
            if v > best.violation {
                *best = TiWitness { xi: xi.clone(), k, violation: v };
            }
        }
        Ok(())
    };

    let center = alloc::vec![0.0; dims + 1];
    search(grid(&center, 1.0, SWEEP_POINTS), &mut best)?;
    if best.violation > 0.0 {
        let mut center: Vec<f64> = best.xi[..dims].to_vec();
        center.push(best.k);
        search(grid(&center, coarse, REFINE_POINTS), &mut best)?;
    }
    Ok(best)
}

fn draw(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng::uniform(rng, -1.0, 1.0)).collect()
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cequiv::{CeSpec, Phi};
    use crate::space::Prior;
    use alloc::vec;

    #[test]
    fn entropic_is_translation_invariant() {
        let spec = CeSpec::entropic(2.5, Prior::new(vec![0.1, 0.3, 0.6]).unwrap()).unwrap();
        let r = probe_properties(&spec, 500, 11).unwrap();
        assert!(r.translation_invariant.violation <= 1e-12, "{}", r.translation_invariant.violation);
        assert!(r.monotone.passes() && r.normalized.passes());
        assert!(!r.positively_homogeneous.passes());
    }

    #[test]
    fn power_smooth_fails_translation_invariance() {
        let supp = vec![Prior::new(vec![0.3, 0.7]).unwrap(), Prior::new(vec![0.7, 0.3]).unwrap()];
        let spec = CeSpec::smooth(supp, Prior::uniform(2), Phi::power(0.5)).unwrap();
        let r = probe_properties(&spec, 200, 3).unwrap();
        assert!(r.translation_invariant.violation > 1e-3);
        let w = &r.ti_witness;
        let shifted: Vec<f64> = w.xi.iter().map(|x| x + w.k).collect();
        let again = (spec.evaluate(&shifted).unwrap() - spec.evaluate(&w.xi).unwrap() - w.k).abs();
        assert!((again - w.violation).abs() < 1e-15);
    }

    #[test]
    fn maxmin_is_homogeneous_and_concave() {
        let spec = CeSpec::maxmin(vec![
            Prior::new(vec![0.4, 0.6]).unwrap(),
            Prior::new(vec![0.6, 0.4]).unwrap(),
        ])
        .unwrap();
        let r = probe_properties(&spec, 1000, 5).unwrap();
        assert!(r.positively_homogeneous.passes());
        assert!(r.concave.passes());
        assert!(r.translation_invariant.passes());
    }

    #[test]
    fn seeded_runs_reproduce() {
        let spec = CeSpec::entropic(1.0, Prior::uniform(2)).unwrap();
        let a = probe_properties(&spec, 50, 9).unwrap();
        let b = probe_properties(&spec, 50, 9).unwrap();
        assert_eq!(a, b);
    }
}
