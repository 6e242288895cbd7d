//! Smooth ambiguity models on path measures: the entropy decomposition that
//! makes an exponential pair `(phi0, phi+1) = (exp theta, exp theta beta)`
//! rectangular, and the translation-invariance test that pins down `phi`.

use alloc::vec::Vec;

use super::entropy::{entropy_projection, Projection};
use super::measure::TruncatedMeasure;
use super::rectangular::{check_generalized_rectangularity, RectangularityReport};
use crate::cequiv::{probe_properties, smooth, CeSpec, Phi, TiWitness};
use crate::error::{Error, Result};
use crate::math::checked_pow;
use crate::rng;
use crate::space::{DiscountedUtilityScale, Prior};
use crate::tree::AdaptedTree;

/// Largest support built by [`product_form_prior`].
pub const MAX_SUPPORT: u128 = 100_000;

/// Translation invariance counts as exact below this violation.
pub const TI_EXACT_TOL: f64 = 1e-10;

/// A finite second-order prior over path measures of one depth.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderPrior {
    support: Vec<TruncatedMeasure>,
    weights: Vec<f64>,
}

impl SecondOrderPrior {
    pub fn new(support: Vec<TruncatedMeasure>, weights: Vec<f64>) -> Result<Self> {
        let first = support.first().ok_or_else(|| Error::InvalidPrior("empty second-order support".into()))?;
        if support.len() != weights.len() {
            return Err(Error::ArityMismatch { expected: support.len(), found: weights.len() });
        }
        if support.iter().any(|m| m.arity() != first.arity() || m.depth() != first.depth()) {
            return Err(Error::InvalidPrior("support measures have different shapes".into()));
        }
        Prior::new(weights.clone())?;
        Ok(Self { support, weights })
    }

    pub fn from_priors(support: &[Prior], weights: &Prior) -> Result<Self> {
        Self::new(support.iter().map(TruncatedMeasure::from_prior).collect(), weights.weights().to_vec())
    }

    /// Point masses on every path, weighted by the IID product of `prior`.
    pub fn dirac_paths(prior: &Prior, depth: usize) -> Self {
        let n = prior.len();
        let paths = checked_pow(n, depth) as usize;
        let support = (0..paths)
            .map(|i| {
                let mut w = alloc::vec![0.0; paths];
                w[i] = 1.0;
                TruncatedMeasure::new(n, depth, w).expect("a point mass is a probability")
            })
            .collect();
        Self { support, weights: TruncatedMeasure::iid(prior, depth).weights().to_vec() }
    }

    pub fn support(&self) -> &[TruncatedMeasure] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn depth(&self) -> usize {
        self.support[0].depth()
    }

    pub fn arity(&self) -> usize {
        self.support[0].arity()
    }

    /// The same second-order prior seen through the first `depth` shocks.
    pub fn truncate(&self, depth: usize) -> Self {
        Self { support: self.support.iter().map(|m| m.truncate(depth)).collect(), weights: self.weights.clone() }
    }

    /// True when some event gets a probability strictly between 0 and 1
    /// under `mu`, i.e. two charged support points differ.
    pub fn is_nondegenerate(&self) -> bool {
        let charged: Vec<&TruncatedMeasure> =
            self.support.iter().zip(&self.weights).filter(|(_, w)| **w > 0.0).map(|(m, _)| m).collect();
        charged.iter().any(|m| *m != charged[0])
    }

    /// `phi^-1(sum_Q mu(Q) phi(E_Q[xi]))` with the support truncated to the
    /// depth of `xi`.
    pub fn evaluate(&self, phi: &Phi, xi: &AdaptedTree) -> Result<f64> {
        if xi.arity() != self.arity() || xi.depth() > self.depth() {
            return Err(Error::MalformedTree("tree shape does not fit the second-order prior".into()));
        }
        let (support, weights) = self.as_priors(xi.depth())?;
        smooth(&support, &weights, phi, xi.values())
    }

    /// `min { R(nu || mu) : E_nu[Q] = P }` with the support truncated to the
    /// depth of `p`.
    pub fn entropy(&self, p: &TruncatedMeasure) -> Result<Projection> {
        let support: Vec<Vec<f64>> = self.support.iter().map(|m| m.truncate(p.depth()).weights().to_vec()).collect();
        if p.depth() == 0 {
            return Ok(Projection {
                feasible: true,
                nu: self.weights.clone(),
                lambda: Vec::new(),
                value: 0.0,
                gradient_norm: 0.0,
                barycenter_error: 0.0,
                iterations: 0,
            });
        }
        entropy_projection(&support, &self.weights, p.weights())
    }

    fn as_priors(&self, depth: usize) -> Result<(Vec<Prior>, Prior)> {
        let support =
            self.support.iter().map(|m| Prior::new(m.truncate(depth).weights().to_vec())).collect::<Result<_>>()?;
        Ok((support, Prior::new(self.weights.clone())?))
    }
}

/// Builds the depth-`depth` prior obtained by drawing a first-shock measure
/// from `mu_plus_one` and, independently for every branch, a continuation
/// from the depth-`depth - 1` construction; equal measures are merged.
///
/// When `mu_plus_one` is supported on point masses the result satisfies the
/// entropy decomposition exactly.
pub fn product_form_prior(mu_plus_one: &SecondOrderPrior, depth: usize) -> Result<SecondOrderPrior> {
    if mu_plus_one.depth() != 1 {
        return Err(Error::param("mu_plus_one", "one-step second-order prior must live on depth-1 measures"));
    }
    let n = mu_plus_one.arity();
    let roots: Vec<(Prior, f64)> = mu_plus_one
        .support
        .iter()
        .zip(&mu_plus_one.weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(m, w)| (m.first_marginal(), *w))
        .collect();
    let mut level: Vec<(TruncatedMeasure, f64)> = alloc::vec![(TruncatedMeasure::trivial(n), 1.0)];
    for _ in 0..depth {
        let size = (roots.len() as u128).saturating_mul(checked_pow(level.len(), n));
        if size > MAX_SUPPORT {
            return Err(Error::CapExceeded { what: "product-form support", size, cap: MAX_SUPPORT });
        }
        let mut next: Vec<(TruncatedMeasure, f64)> = Vec::new();
        let mut pick = alloc::vec![0usize; n];
        for (root, w) in &roots {
            pick.iter_mut().for_each(|p| *p = 0);
            loop {
                let conts: Vec<TruncatedMeasure> = pick.iter().map(|&i| level[i].0.clone()).collect();
                let weight = w * pick.iter().map(|&i| level[i].1).product::<f64>();
                let m = TruncatedMeasure::paste(root, &conts);
                match next.iter_mut().find(|(q, _)| *q == m) {
                    Some(slot) => slot.1 += weight,
                    None => next.push((m, weight)),
                }
                if !super::rectangular::advance(&mut pick, level.len()) {
                    break;
                }
            }
        }
        level = next;
    }
    let total: f64 = level.iter().map(|(_, w)| w).sum();
    let (support, weights): (Vec<_>, Vec<_>) = level.into_iter().map(|(m, w)| (m, w / total)).unzip();
    SecondOrderPrior::new(support, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothEntropyReport {
    /// Largest `|lhs - rhs|` of the entropy decomposition over evaluated samples.
    pub gap: f64,
    /// Path weights of the sample attaining `gap`.
    pub worst_measure: Vec<f64>,
    pub evaluated: usize,
    /// Samples skipped because some projection was infeasible.
    pub skipped: usize,
    /// Conditional terms dropped because `P+1(s) = 0`.
    pub dropped_branches: usize,
    /// Rectangularity of the induced exponential pair.
    pub rectangularity: RectangularityReport,
}

/// Compares, on sampled path measures `P`,
///
/// ```text
/// D(P; mu0)   vs   sum_s P+1(s) D(P_s; mu0) + D(P+1; mu+1)
/// ```
///
/// where `D(P; mu) = min { R(nu || mu) : E_nu[Q] = P }`, and checks the
/// induced pair `phi0 = exp theta`, `phi+1 = exp theta beta` for
/// generalized rectangularity.
///
/// Samples `P` are random mixtures of the support of `mu0` (depth 1 or 2).
pub fn check_smooth_entropy_condition(
    mu0: &SecondOrderPrior,
    mu_plus_one: &SecondOrderPrior,
    theta: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<SmoothEntropyReport> {
    DiscountedUtilityScale::new(beta)?;
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::param("theta", "theta must be positive"));
    }
    let depth = mu0.depth();
    if !(1..=2).contains(&depth) {
        return Err(Error::param("depth", "the entropy decomposition is checked at depth 1 or 2"));
    }
    if mu_plus_one.depth() != 1 || mu_plus_one.arity() != mu0.arity() {
        return Err(Error::param("mu_plus_one", "one-step second-order prior must live on depth-1 measures"));
    }
    let n = mu0.arity();
    let mut rng = rng::seeded(seed);
    let mut report = SmoothEntropyReport {
        gap: 0.0,
        worst_measure: Vec::new(),
        evaluated: 0,
        skipped: 0,
        dropped_branches: 0,
        rectangularity: RectangularityReport {
            samples: 0,
            residual: 0.0,
            worst_case: Vec::new(),
            fixed_point_gap: 0.0,
            gap_worst_case: Vec::new(),
        },
    };
    let k = mu0.support().len();
    for _ in 0..samples {
        let mix = rng::simplex_point(&mut rng, k);
        let mut w = alloc::vec![0.0; mu0.support()[0].weights().len()];
        for (m, a) in mu0.support().iter().zip(&mix) {
            for (x, y) in w.iter_mut().zip(m.weights()) {
                *x += a * y;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let p = TruncatedMeasure::new(n, depth, w)?;

        let lhs = mu0.entropy(&p)?;
        let first = p.first_marginal();
        let one_step = mu_plus_one.entropy(&TruncatedMeasure::from_prior(&first))?;
        let mut rhs = one_step.value;
        let mut feasible = lhs.feasible && one_step.feasible;
        for s in 0..n {
            match p.conditional(s) {
                Some(ps) => {
                    let d = mu0.entropy(&ps)?;
                    feasible &= d.feasible;
                    rhs += first.weights()[s] * d.value;
                }
                None => report.dropped_branches += 1,
            }
        }
        if !feasible {
            report.skipped += 1;
            continue;
        }
        report.evaluated += 1;
        let gap = (lhs.value - rhs).abs();
        if gap > report.gap || report.worst_measure.is_empty() {
            report.gap = gap;
            report.worst_measure = p.weights().to_vec();
        }
    }

    let phi0 = Phi::Exponential { theta };
    let (supp1, w1) = mu_plus_one.as_priors(1)?;
    let i_plus_one = CeSpec::smooth(supp1, w1, Phi::Exponential { theta: theta * beta })?;
    report.rectangularity =
        check_generalized_rectangularity(|xi| mu0.evaluate(&phi0, xi), &i_plus_one, beta, depth, samples, seed)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFormReport {
    /// Worst `|I(xi + k) - I(xi) - k|` found (random samples and grid sweep).
    pub ti_violation: f64,
    pub witness: TiWitness,
    pub is_exponential_or_linear: bool,
    /// Degenerate second-order prior: translation invariance holds for any
    /// `phi` and says nothing about its form.
    pub inconclusive: bool,
}

impl ExponentialFormReport {
    pub fn translation_invariant(&self) -> bool {
        self.ti_violation <= TI_EXACT_TOL
    }
}

/// Probes the smooth functional `(phi, mu)` for translation invariance.
pub fn check_exponential_form(
    phi: &Phi,
    support: &[Prior],
    weights: &Prior,
    samples: usize,
    seed: u64,
) -> Result<ExponentialFormReport> {
    let spec = CeSpec::smooth(support.to_vec(), weights.clone(), phi.clone())?;
    let report = probe_properties(&spec, samples, seed)?;
    Ok(ExponentialFormReport {
        ti_violation: report.ti_witness.violation,
        witness: report.ti_witness,
        is_exponential_or_linear: phi.is_exponential_family(),
        inconclusive: !spec.is_nondegenerate_smooth(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dirac_product_form_is_exact() {
        let l = Prior::new(vec![0.3, 0.7]).unwrap();
        let mu1 = SecondOrderPrior::dirac_paths(&l, 1);
        let mu0 = product_form_prior(&mu1, 2).unwrap();
        assert_eq!(mu0.support().len(), 4);
        let r = check_smooth_entropy_condition(&mu0, &mu1, 1.0, 0.5, 20, 7).unwrap();
        assert_eq!(r.evaluated, 20);
        assert!(r.gap <= 1e-6, "{}", r.gap);
        assert!(r.rectangularity.residual <= 1e-8);
    }

    #[test]
    fn point_masses_have_zero_entropy_on_products() {
        let l = Prior::new(vec![0.4, 0.6]).unwrap();
        let mu1 = SecondOrderPrior::from_priors(&[l.clone()], &Prior::new(vec![1.0]).unwrap()).unwrap();
        let mu0 = SecondOrderPrior::new(vec![TruncatedMeasure::iid(&l, 2)], vec![1.0]).unwrap();
        let r = check_smooth_entropy_condition(&mu0, &mu1, 2.0, 0.9, 5, 1).unwrap();
        assert_eq!(r.evaluated, 5);
        assert!(r.gap < 1e-12);
    }

    #[test]
    fn mismatched_prior_breaks_the_decomposition() {
        let l = Prior::new(vec![0.3, 0.7]).unwrap();
        let mu1 = SecondOrderPrior::dirac_paths(&l, 1);
        let a = TruncatedMeasure::iid(&Prior::new(vec![0.2, 0.8]).unwrap(), 2);
        let b = TruncatedMeasure::iid(&Prior::new(vec![0.7, 0.3]).unwrap(), 2);
        let mu0 = SecondOrderPrior::new(vec![a, b], vec![0.5, 0.5]).unwrap();
        let r = check_smooth_entropy_condition(&mu0, &mu1, 1.0, 0.5, 20, 3).unwrap();
        assert!(r.evaluated > 0);
        assert!(r.gap > 1e-3, "{}", r.gap);
    }

    #[test]
    fn exponential_form() {
        let supp = vec![Prior::new(vec![0.3, 0.7]).unwrap(), Prior::new(vec![0.7, 0.3]).unwrap()];
        let u = Prior::uniform(2);
        let lin = check_exponential_form(&Phi::Linear, &supp, &u, 200, 1).unwrap();
        assert!(lin.ti_violation <= 1e-12 && lin.is_exponential_or_linear && !lin.inconclusive);
        let ex = check_exponential_form(&Phi::Exponential { theta: 2.0 }, &supp, &u, 200, 1).unwrap();
        assert!(ex.ti_violation <= 1e-12, "{}", ex.ti_violation);
        let pw = check_exponential_form(&Phi::power(0.5), &supp, &u, 200, 1).unwrap();
        assert!(pw.ti_violation > 1e-3 && !pw.translation_invariant());
        let degenerate = check_exponential_form(&Phi::power(0.5), &supp, &Prior::dirac(2, 0), 50, 1).unwrap();
        assert!(degenerate.inconclusive && degenerate.ti_violation <= 1e-12);
    }
}
