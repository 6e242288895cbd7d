//! Variational ex-ante costs composed from a one-step cost.
//!
//! ```text
//! c0(P) = sum_s P+1(s) c0(P_s) + beta c+1(P+1),   c0 = 0 at depth 0
//! ```
//!
//! on the product domain that picks one prior of the one-step table at each
//! internal node. Branches with `P+1(s) = 0` contribute nothing.

use alloc::vec::Vec;

use super::measure::TruncatedMeasure;
use super::rectangular::advance;
use crate::cequiv::VariationalTable;
use crate::error::{Error, Result};
use crate::math::{checked_pow, internal_nodes};
use crate::space::{DiscountedUtilityScale, Prior};
use crate::tree::AdaptedTree;

const GROUNDED_TOL: f64 = 1e-9;

/// Largest product domain materialized by [`NoGainComposition::to_table`].
pub const MAX_TABLE_ROWS: u128 = 1_000_000;

/// Largest product domain scanned by [`NoGainComposition::evaluate`].
pub const MAX_SCAN: u128 = 100_000_000;

/// Largest number of paths `n^T` of a composed domain.
pub const MAX_PATHS: u128 = 100_000;

/// Measures of one depth paired with non-negative, grounded costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    measures: Vec<TruncatedMeasure>,
    costs: Vec<f64>,
}

impl CostTable {
    pub fn new(measures: Vec<TruncatedMeasure>, costs: Vec<f64>) -> Result<Self> {
        let first = measures.first().ok_or_else(|| Error::param("measures", "empty cost table"))?;
        if measures.len() != costs.len() {
            return Err(Error::ArityMismatch { expected: measures.len(), found: costs.len() });
        }
        if measures.iter().any(|m| m.arity() != first.arity() || m.depth() != first.depth()) {
            return Err(Error::param("measures", "measures have different shapes"));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::param("costs", "costs must be finite and non-negative"));
        }
        if costs.iter().copied().fold(f64::INFINITY, f64::min) > GROUNDED_TOL {
            return Err(Error::param("costs", "cost table is not grounded (min cost > 1e-9)"));
        }
        Ok(Self { measures, costs })
    }

    pub fn from_variational(table: &VariationalTable) -> Self {
        Self {
            measures: table.priors().iter().map(TruncatedMeasure::from_prior).collect(),
            costs: table.costs().to_vec(),
        }
    }

    pub fn measures(&self) -> &[TruncatedMeasure] {
        &self.measures
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn depth(&self) -> usize {
        self.measures[0].depth()
    }

    pub fn arity(&self) -> usize {
        self.measures[0].arity()
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.measures.clone(), self.costs.iter().map(|c| c * factor).collect())
    }

    /// `min_P E_P[xi] + c(P)`.
    pub fn evaluate(&self, xi: &AdaptedTree) -> Result<f64> {
        if xi.depth() != self.depth() || xi.arity() != self.arity() {
            return Err(Error::MalformedTree("tree shape does not match the cost table".into()));
        }
        Ok(self
            .measures
            .iter()
            .zip(&self.costs)
            .map(|(m, c)| m.expectation(xi) + c)
            .fold(f64::INFINITY, f64::min))
    }
}

/// The composed cost, kept implicit: one index into the one-step table per
/// internal node (level order) determines a measure and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct NoGainComposition {
    priors: Vec<Prior>,
    costs: Vec<f64>,
    beta: f64,
    depth: usize,
}

/// Composes a depth-1 cost table up to `depth`.
pub fn nogain_compose(c_plus_one: &CostTable, beta: f64, depth: usize) -> Result<NoGainComposition> {
    DiscountedUtilityScale::new(beta)?;
    if c_plus_one.depth() != 1 {
        return Err(Error::param("c_plus_one", "one-step cost must live on depth-1 measures"));
    }
    let paths = checked_pow(c_plus_one.arity(), depth);
    if paths > MAX_PATHS {
        return Err(Error::CapExceeded { what: "composed path count", size: paths, cap: MAX_PATHS });
    }
    let priors = c_plus_one.measures().iter().map(TruncatedMeasure::first_marginal).collect();
    Ok(NoGainComposition { priors, costs: c_plus_one.costs().to_vec(), beta, depth })
}

impl NoGainComposition {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arity(&self) -> usize {
        self.priors[0].len()
    }

    /// Number of prior choices, one per internal node.
    pub fn choices(&self) -> usize {
        internal_nodes(self.arity(), self.depth)
    }

    /// Size of the product domain.
    pub fn len(&self) -> u128 {
        domain_size(self.priors.len(), self.choices())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn measure(&self, choice: &[usize]) -> Result<TruncatedMeasure> {
        self.check_choice(choice)?;
        let mut w = Vec::new();
        self.path_weights(self.depth, choice, &mut w);
        TruncatedMeasure::new(self.arity(), self.depth, w)
    }

    pub fn cost(&self, choice: &[usize]) -> Result<f64> {
        self.check_choice(choice)?;
        let mut scratch = Vec::new();
        Ok(self.composed_cost(self.depth, choice, &mut scratch))
    }

    /// Lists the whole product domain.
    pub fn to_table(&self) -> Result<CostTable> {
        let size = self.len();
        if size > MAX_TABLE_ROWS {
            return Err(Error::CapExceeded { what: "composed cost table", size, cap: MAX_TABLE_ROWS });
        }
        if self.depth == 0 {
            return CostTable::new(alloc::vec![TruncatedMeasure::trivial(self.arity())], alloc::vec![0.0]);
        }
        let mut measures = Vec::with_capacity(size as usize);
        let mut costs = Vec::with_capacity(size as usize);
        let mut choice = alloc::vec![0usize; self.choices()];
        let mut scratch = Vec::new();
        loop {
            let mut w = Vec::new();
            self.path_weights(self.depth, &choice, &mut w);
            measures.push(TruncatedMeasure::new(self.arity(), self.depth, w)?);
            costs.push(self.composed_cost(self.depth, &choice, &mut scratch));
            if !advance(&mut choice, self.priors.len()) {
                break;
            }
        }
        CostTable::new(measures, costs)
    }

    /// Variational ex-ante certainty equivalent `min_P E_P[xi] + c0(P)` by
    /// exhaustive scan of the product domain at the depth of `xi`, which may
    /// be anything up to the composition depth.
    pub fn evaluate(&self, xi: &AdaptedTree) -> Result<f64> {
        let n = self.arity();
        if xi.arity() != n {
            return Err(Error::ArityMismatch { expected: n, found: xi.arity() });
        }
        let depth = xi.depth();
        if depth > self.depth {
            return Err(Error::param("depth", "tree is deeper than the composed cost"));
        }
        if depth == 0 {
            return Ok(xi.values()[0]);
        }
        let slots = internal_nodes(n, depth);
        let size = domain_size(self.priors.len(), slots);
        if size > MAX_SCAN {
            return Err(Error::CapExceeded { what: "product domain scan", size, cap: MAX_SCAN });
        }
        let mut choice = alloc::vec![0usize; slots];
        let mut weights = Vec::new();
        let mut scratch = Vec::new();
        let mut best = f64::INFINITY;
        loop {
            self.path_weights(depth, &choice, &mut weights);
            let e: f64 = weights.iter().zip(xi.values()).map(|(w, x)| w * x).sum();
            let v = e + self.composed_cost(depth, &choice, &mut scratch);
            if v < best {
                best = v;
            }
            if !advance(&mut choice, self.priors.len()) {
                break;
            }
        }
        Ok(best)
    }

    fn check_choice(&self, choice: &[usize]) -> Result<()> {
        if choice.len() != self.choices() {
            return Err(Error::ArityMismatch { expected: self.choices(), found: choice.len() });
        }
        if choice.iter().any(|&c| c >= self.priors.len()) {
            return Err(Error::param("choice", "prior index out of range"));
        }
        Ok(())
    }

    /// Path probabilities of the measure picked by `choice` at `depth`.
    fn path_weights(&self, depth: usize, choice: &[usize], out: &mut Vec<f64>) {
        let n = self.arity();
        out.clear();
        out.push(1.0);
        let mut offset = 0;
        for _ in 0..depth {
            let level = out.len();
            let mut next = Vec::with_capacity(level * n);
            for (j, &w) in out.iter().enumerate() {
                let q = self.priors[choice[offset + j]].weights();
                next.extend(q.iter().map(|p| w * p));
            }
            offset += level;
            *out = next;
        }
    }

    /// `c0` of the measure picked by `choice`, computed bottom-up.
    fn composed_cost(&self, depth: usize, choice: &[usize], scratch: &mut Vec<f64>) -> f64 {
        let n = self.arity();
        scratch.clear();
        scratch.resize(checked_pow(n, depth) as usize, 0.0);
        for t in (0..depth).rev() {
            let offset = internal_nodes(n, t);
            let width = checked_pow(n, t) as usize;
            for j in 0..width {
                let k = choice[offset + j];
                let q = self.priors[k].weights();
                let below: f64 = q
                    .iter()
                    .zip(&scratch[j * n..(j + 1) * n])
                    .map(|(p, c)| if *p > 0.0 { p * c } else { 0.0 })
                    .sum();
                scratch[j] = below + self.beta * self.costs[k];
            }
            scratch.truncate(width);
        }
        scratch[0]
    }
}

fn domain_size(base: usize, slots: usize) -> u128 {
    let mut size: u128 = 1;
    for _ in 0..slots {
        size = size.saturating_mul(base as u128);
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::relative_entropy;
    use alloc::vec;

    fn entropic_table(theta: f64, m: usize) -> CostTable {
        CostTable::from_variational(&VariationalTable::entropic_grid(theta, &Prior::uniform(2), m).unwrap())
    }

    #[test]
    fn depth_one_is_discounted_one_step_cost() {
        let c = entropic_table(1.0, 10);
        let composed = nogain_compose(&c, 0.5, 1).unwrap().to_table().unwrap();
        for (a, b) in composed.costs().iter().zip(c.costs()) {
            assert!((a - 0.5 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_cost_composes_to_zero() {
        let table = entropic_table(1.0, 4).scaled(0.0).unwrap();
        for depth in 0..3 {
            let composed = nogain_compose(&table, 0.7, depth).unwrap().to_table().unwrap();
            assert!(composed.costs().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn costs_scale_linearly() {
        let c = entropic_table(1.0, 5);
        let a = nogain_compose(&c, 0.5, 2).unwrap().to_table().unwrap();
        // powers of two scale without rounding, so the identity is exact
        let b = nogain_compose(&c.scaled(4.0).unwrap(), 0.5, 2).unwrap().to_table().unwrap();
        for (x, y) in a.costs().iter().zip(b.costs()) {
            assert_eq!(4.0 * x, *y);
        }
        let b = nogain_compose(&c.scaled(3.0).unwrap(), 0.5, 2).unwrap().to_table().unwrap();
        for (x, y) in a.costs().iter().zip(b.costs()) {
            assert!((3.0 * x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn entropic_cost_composes_to_path_entropy() {
        // with c+1 = R(.||u) / (theta beta) the composed cost of a product
        // measure is the path relative entropy over theta (chain rule)
        let (theta, beta) = (1.0, 0.5);
        let c = entropic_table(theta * beta, 4);
        let comp = nogain_compose(&c, beta, 2).unwrap();
        let table = comp.to_table().unwrap();
        let u = TruncatedMeasure::iid(&Prior::uniform(2), 2);
        for (m, cost) in table.measures().iter().zip(table.costs()) {
            let r = relative_entropy(m.weights(), u.weights()) / theta;
            assert!((r - cost).abs() < 1e-12, "{r} vs {cost}");
        }
    }

    #[test]
    fn evaluate_matches_materialized_table() {
        let c = entropic_table(0.5, 6);
        let comp = nogain_compose(&c, 0.5, 2).unwrap();
        let xi = AdaptedTree::leaves(2, 2, vec![0.3, -0.7, 1.0, 0.1]).unwrap();
        let direct = comp.evaluate(&xi).unwrap();
        assert_eq!(direct, comp.to_table().unwrap().evaluate(&xi).unwrap());
        let shallow = AdaptedTree::leaves(2, 1, vec![0.3, -0.7]).unwrap();
        let one = nogain_compose(&c, 0.5, 1).unwrap().to_table().unwrap();
        assert_eq!(comp.evaluate(&shallow).unwrap(), one.evaluate(&shallow).unwrap());
    }

    #[test]
    fn grounded_when_one_step_cost_is() {
        let comp = nogain_compose(&entropic_table(1.0, 4), 0.9, 2).unwrap().to_table().unwrap();
        assert!(comp.costs().iter().copied().fold(f64::INFINITY, f64::min) <= 1e-9);
        assert!(comp.costs().iter().all(|&c| c >= 0.0));
    }
}
