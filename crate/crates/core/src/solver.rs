//! Ex-ante certainty equivalents as fixed points.
//!
//! Two independent routes to the same object:
//!
//! * [`solve_nested`] unrolls `I0(xi) = beta I+1(I0(xi^1) / beta)` backwards
//!   from the leaves of a lifetime-utility tree;
//! * [`solve_value_iteration`] iterates `T(V)(h) = u(h0) + beta I+1(V o h^1)`
//!   over the finite set of sub-plans of the given plans until the sup-norm
//!   residual drops below the tolerance, recording contraction diagnostics.

use alloc::vec::Vec;

use crate::cequiv::{CeSpec, CertaintyEquivalent};
use crate::error::{Error, Result};
use crate::math::internal_nodes;
use crate::space::{DiscountedUtilityScale, Prior};
use crate::tree::{leaf_count, lifetime_utility, truncation_error_bound, AdaptedTree, PayloadKind};
use crate::DEFAULT_MAX_LEAVES;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SolveConfig<C = CeSpec> {
    pub i_plus_one: C,
    pub scale: DiscountedUtilityScale,
    /// Sup-norm residual at which value iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub max_leaves: usize,
}

impl<C: CertaintyEquivalent> SolveConfig<C> {
    pub fn new(i_plus_one: C, scale: DiscountedUtilityScale) -> Self {
        Self { i_plus_one, scale, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, max_leaves: DEFAULT_MAX_LEAVES }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_max_leaves(mut self, max_leaves: usize) -> Self {
        self.max_leaves = max_leaves;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("tol", "tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "need at least one iteration"));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.scale.beta()
    }
}

/// Exact backward evaluation of the ex-ante certainty equivalent:
/// leaves keep their value and every internal node gets
/// `beta * I+1((v_s / beta)_s)` from its children `v_s`.
pub fn solve_nested<C: CertaintyEquivalent>(cfg: &SolveConfig<C>, xi: &AdaptedTree) -> Result<f64> {
    Ok(nested_levels(cfg, xi)?[0][0])
}

/// All node values of the backward evaluation, root level first.
pub fn nested_levels<C: CertaintyEquivalent>(cfg: &SolveConfig<C>, xi: &AdaptedTree) -> Result<Vec<Vec<f64>>> {
    if xi.kind() != PayloadKind::LeafValues {
        return Err(Error::MalformedTree("nested evaluation needs a leaf-valued tree".into()));
    }
    let n = xi.arity();
    if n != cfg.i_plus_one.arity() {
        return Err(Error::ArityMismatch { expected: cfg.i_plus_one.arity(), found: n });
    }
    leaf_count(n, xi.depth(), cfg.max_leaves)?;
    let beta = cfg.beta();
    let mut levels = alloc::vec![xi.values().to_vec()];
    let mut buf = alloc::vec![0.0; n];
    for _ in 0..xi.depth() {
        let below = levels.last().expect("at least the leaf level");
        let mut above = Vec::with_capacity(below.len() / n);
        for children in below.chunks_exact(n) {
            for (b, &v) in buf.iter_mut().zip(children) {
                *b = v / beta;
            }
            above.push(beta * cfg.i_plus_one.evaluate(&buf)?);
        }
        levels.push(above);
    }
    levels.reverse();
    Ok(levels)
}

/// Initial value function `V0(h) = I0_seed(U(h))` of value iteration.
///
/// Every seed is itself a translation-invariant ex-ante certainty
/// equivalent; they differ only in where iteration starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Seed {
    /// Product-measure expectation under the uniform prior.
    #[default]
    UniformExpectation,
    /// The ex-ante functional generated by a one-step model.
    Spec(CeSpec),
    /// Worst path: `min U(h)`.
    Worst,
    /// Best path: `max U(h)`.
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Fixed-point value `V*(h)` of each input plan.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `sup_h |T^k(V0)(h) - T^{k-1}(V0)(h)|` for `k = 1, 2, ..`.
    pub residuals: Vec<f64>,
    /// `residual_{k+1} / residual_k`, recorded while `residual_k > 0`.
    pub contraction_ratios: Vec<f64>,
    pub truncation_bound: f64,
    pub converged: bool,
    /// False when `I+1` is not known to be translation invariant, in which
    /// case uniqueness of the fixed point is not guaranteed.
    pub uniqueness_guaranteed: bool,
}

impl SolveReport {
    pub fn max_contraction_ratio(&self) -> f64 {
        self.contraction_ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Flattened sub-plan graph: every node of every plan is a sub-plan; the
/// depth-`T` nodes carry a constant tail and are their own continuations.
struct SubPlans {
    arity: usize,
    utility: Vec<f64>,
    children: Vec<usize>,
    roots: Vec<usize>,
    /// Nodes ordered so that children come before parents (terminals first).
    backward: Vec<usize>,
}

impl SubPlans {
    fn build(plans: &[AdaptedTree]) -> Result<Self> {
        let arity = plans.first().map(AdaptedTree::arity).ok_or_else(|| Error::param("plans", "no plans given"))?;
        let mut utility = Vec::new();
        let mut children = Vec::new();
        let mut roots = Vec::new();
        let mut backward = Vec::new();
        for plan in plans {
            if plan.kind() != PayloadKind::NodeValues {
                return Err(Error::MalformedTree("value iteration needs node-valued plans".into()));
            }
            if plan.arity() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: plan.arity() });
            }
            let base = utility.len();
            let depth = plan.depth();
            roots.push(base);
            for t in 0..=depth {
                let level_start = base + internal_nodes(arity, t);
                let next_start = base + internal_nodes(arity, t + 1);
                for (i, &w) in plan.level(t).iter().enumerate() {
                    let id = level_start + i;
                    utility.push(w);
                    for s in 0..arity {
                        children.push(if t == depth { id } else { next_start + i * arity + s });
                    }
                }
            }
            backward.extend((base..utility.len()).rev());
        }
        Ok(Self { arity, utility, children, roots, backward })
    }

    fn len(&self) -> usize {
        self.utility.len()
    }

    fn kids(&self, id: usize) -> &[usize] {
        &self.children[id * self.arity..(id + 1) * self.arity]
    }

    /// `V0(h) = I0(U(h))` for an ex-ante functional generated by `step`; the
    /// nested identity lets us compute it by one backward sweep.
    fn seed_values(&self, beta: f64, step: &dyn Fn(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
        let mut v = alloc::vec![0.0; self.len()];
        let mut buf = alloc::vec![0.0; self.arity];
        for &id in &self.backward {
            let kids = self.kids(id);
            if kids[0] == id {
                v[id] = self.utility[id] / (1.0 - beta);
                continue;
            }
            for (b, &k) in buf.iter_mut().zip(kids) {
                *b = v[k];
            }
            v[id] = self.utility[id] + beta * step(&buf)?;
        }
        Ok(v)
    }
}

/// Value iteration on the recursive representation, started from `V0`
/// built from the default seed (uniform product expectation).
pub fn solve_value_iteration<C: CertaintyEquivalent>(cfg: &SolveConfig<C>, plans: &[AdaptedTree]) -> Result<SolveReport> {
    solve_value_iteration_from(cfg, plans, &Seed::default())
}

pub fn solve_value_iteration_from<C: CertaintyEquivalent>(
    cfg: &SolveConfig<C>,
    plans: &[AdaptedTree],
    seed: &Seed,
) -> Result<SolveReport> {
    cfg.validate()?;
    let graph = SubPlans::build(plans)?;
    let n = graph.arity;
    if n != cfg.i_plus_one.arity() {
        return Err(Error::ArityMismatch { expected: cfg.i_plus_one.arity(), found: n });
    }
    let beta = cfg.beta();
    let max_depth = plans.iter().map(AdaptedTree::depth).max().unwrap_or(0);
    for plan in plans {
        leaf_count(n, plan.depth(), cfg.max_leaves)?;
        // range of node values against this scale
        AdaptedTree::plan_with_cap(n, plan.depth(), plan.values().to_vec(), &cfg.scale, cfg.max_leaves)?;
    }

    let mut current = match seed {
        Seed::UniformExpectation => {
            let u = Prior::uniform(n);
            graph.seed_values(beta, &|x| Ok(u.expectation(x)))?
        }
        Seed::Spec(spec) => {
            if spec.arity() != n {
                return Err(Error::ArityMismatch { expected: n, found: spec.arity() });
            }
            graph.seed_values(beta, &|x| spec.evaluate(x))?
        }
        Seed::Worst => graph.seed_values(beta, &|x| Ok(x.iter().copied().fold(f64::INFINITY, f64::min)))?,
        Seed::Best => graph.seed_values(beta, &|x| Ok(x.iter().copied().fold(f64::NEG_INFINITY, f64::max)))?,
    };

    let mut next = alloc::vec![0.0; graph.len()];
    let mut buf = alloc::vec![0.0; n];
    let mut residuals = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    while residuals.len() < cfg.max_iter {
        let mut residual: f64 = 0.0;
        for id in 0..graph.len() {
            for (b, &k) in buf.iter_mut().zip(graph.kids(id)) {
                *b = current[k];
            }
            let v = graph.utility[id] + beta * cfg.i_plus_one.evaluate(&buf)?;
            residual = residual.max((v - current[id]).abs());
            next[id] = v;
        }
        core::mem::swap(&mut current, &mut next);
        if let Some(&prev) = residuals.last() {
            if prev > 0.0 {
                ratios.push(residual / prev);
            }
        }
        residuals.push(residual);
        if residual <= cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        values: graph.roots.iter().map(|&r| current[r]).collect(),
        iterations: residuals.len(),
        residuals,
        contraction_ratios: ratios,
        truncation_bound: truncation_error_bound(max_depth, &cfg.scale),
        converged,
        uniqueness_guaranteed: cfg.i_plus_one.is_translation_invariant(),
    })
}

/// `|solve_nested(U(plan)) - V*(plan)|`: disagreement between the two
/// solvers on one plan. Zero up to rounding when `I_{+1}` is translation
/// invariant and positively homogeneous, or the plan has depth at most 1.
pub fn cross_check<C: CertaintyEquivalent>(cfg: &SolveConfig<C>, plan: &AdaptedTree) -> Result<f64> {
    let xi = lifetime_utility(plan, &cfg.scale)?;
    let nested = solve_nested(cfg, &xi)?;
    let report = solve_value_iteration(cfg, core::slice::from_ref(plan))?;
    Ok((nested - report.values[0]).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Prior;
    use alloc::vec;

    fn cfg(spec: CeSpec, beta: f64) -> SolveConfig {
        SolveConfig::new(spec, DiscountedUtilityScale::new(beta).unwrap())
    }

    fn p(w: &[f64]) -> Prior {
        Prior::new(w.to_vec()).unwrap()
    }

    #[test]
    fn indicator_under_expectation() {
        let c = cfg(CeSpec::expectation(Prior::uniform(2)), 0.9);
        let xi = AdaptedTree::leaves(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((solve_nested(&c, &xi).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn indicator_under_maxmin() {
        let c = cfg(CeSpec::maxmin(vec![p(&[0.4, 0.6]), p(&[0.6, 0.4])]).unwrap(), 0.7);
        let xi = AdaptedTree::leaves(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((solve_nested(&c, &xi).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn constants_are_fixed() {
        let c = cfg(CeSpec::entropic(3.0, p(&[0.2, 0.3, 0.5])).unwrap(), 0.6);
        let xi = AdaptedTree::constant(3, 3, -0.35).unwrap();
        assert!((solve_nested(&c, &xi).unwrap() + 0.35).abs() < 1e-15);
    }

    #[test]
    fn zero_plan_converges_immediately() {
        let c = cfg(CeSpec::maxmin(vec![p(&[0.4, 0.6]), p(&[0.6, 0.4])]).unwrap(), 0.9);
        let plan = AdaptedTree::plan(2, 2, vec![0.0; 7], &c.scale).unwrap();
        let r = solve_value_iteration(&c, &[plan]).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert_eq!(r.values, [0.0]);
    }

    #[test]
    fn depth_one_expectation_by_hand() {
        let beta = 0.8;
        let l = p(&[0.3, 0.7]);
        let c = cfg(CeSpec::expectation(l.clone()), beta);
        let plan = AdaptedTree::plan(2, 1, vec![0.1, 0.2, -0.15], &c.scale).unwrap();
        let r = solve_value_iteration(&c, &[plan]).unwrap();
        let expected = 0.1 + beta * (0.3 * 0.2 + 0.7 * -0.15) / (1.0 - beta);
        assert!(r.converged);
        assert!((r.values[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn depth_cap_is_a_config_error() {
        let c = cfg(CeSpec::expectation(Prior::uniform(2)), 0.5).with_max_leaves(4);
        let xi = AdaptedTree::leaves(2, 3, vec![0.0; 8]).unwrap();
        let err = solve_nested(&c, &xi).unwrap_err();
        assert!(err.is_config());
        assert_eq!(err.code(), "CAP_EXCEEDED");
    }

    #[test]
    fn non_ti_spec_is_flagged() {
        let supp = vec![p(&[0.3, 0.7]), p(&[0.7, 0.3])];
        let spec = CeSpec::smooth(supp, Prior::uniform(2), crate::cequiv::Phi::power(0.5)).unwrap();
        let c = cfg(spec, 0.9);
        let plan = AdaptedTree::plan(2, 1, vec![0.05, 0.1, -0.1], &c.scale).unwrap();
        let r = solve_value_iteration(&c, &[plan]).unwrap();
        assert!(!r.uniqueness_guaranteed);
    }
}
