//! Complete `n`-ary adapted trees.
//!
//! A tree of depth `T` over `n` states carries either
//!
//! * one value per leaf (`LeafValues`): a `G_T`-measurable lifetime utility
//!   `xi`, stored in lexicographic path order, so leaf `(s_1, .., s_T)` sits
//!   at the base-`n` index `s_1 s_2 .. s_T`; or
//! * one value per node (`NodeValues`): a consumption plan in per-period
//!   utility units, stored level by level (root first, each level in
//!   lexicographic order). The depth-`T` node value is repeated forever.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{checked_pow, internal_nodes};
use crate::space::DiscountedUtilityScale;
use crate::{DEFAULT_MAX_LEAVES, RANGE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    LeafValues,
    NodeValues,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedTree {
    arity: usize,
    depth: usize,
    kind: PayloadKind,
    values: Vec<f64>,
}

/// Checks `n^depth <= cap` and returns the leaf count.
pub fn leaf_count(arity: usize, depth: usize, cap: usize) -> Result<usize> {
    if arity < 2 {
        return Err(Error::TooFewStates(arity));
    }
    let leaves = checked_pow(arity, depth);
    if leaves > cap as u128 {
        return Err(Error::CapExceeded { what: "tree leaf count", size: leaves, cap: cap as u128 });
    }
    Ok(leaves as usize)
}

impl AdaptedTree {
    /// A lifetime-utility tree; every leaf must lie in `[-1, 1]`.
    pub fn leaves(arity: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        Self::leaves_with_cap(arity, depth, values, DEFAULT_MAX_LEAVES)
    }

    pub fn leaves_with_cap(arity: usize, depth: usize, values: Vec<f64>, cap: usize) -> Result<Self> {
        let count = leaf_count(arity, depth, cap)?;
        if values.len() != count {
            return Err(Error::MalformedTree(format!(
                "depth {depth} over {arity} states needs {count} leaf values, found {}",
                values.len()
            )));
        }
        check_range(&values, 1.0, "leaf value")?;
        Ok(Self { arity, depth, kind: PayloadKind::LeafValues, values })
    }

    /// A plan in per-period utility units; every node value must lie in
    /// `[beta - 1, 1 - beta]`.
    pub fn plan(arity: usize, depth: usize, values: Vec<f64>, scale: &DiscountedUtilityScale) -> Result<Self> {
        Self::plan_with_cap(arity, depth, values, scale, DEFAULT_MAX_LEAVES)
    }

    pub fn plan_with_cap(
        arity: usize,
        depth: usize,
        values: Vec<f64>,
        scale: &DiscountedUtilityScale,
        cap: usize,
    ) -> Result<Self> {
        leaf_count(arity, depth, cap)?;
        let count = internal_nodes(arity, depth + 1);
        if values.len() != count {
            return Err(Error::MalformedTree(format!(
                "plan of depth {depth} over {arity} states needs {count} node values, found {}",
                values.len()
            )));
        }
        check_range(&values, scale.period_bound(), "node value")?;
        Ok(Self { arity, depth, kind: PayloadKind::NodeValues, values })
    }

    /// Constant lifetime utility `k` at the given depth.
    pub fn constant(arity: usize, depth: usize, k: f64) -> Result<Self> {
        let count = leaf_count(arity, depth, DEFAULT_MAX_LEAVES)?;
        Self::leaves(arity, depth, alloc::vec![k; count])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kind(&self) -> PayloadKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Leaf at a full path of length `depth` (leaf trees only).
    pub fn leaf(&self, path: &[usize]) -> f64 {
        debug_assert_eq!(self.kind, PayloadKind::LeafValues);
        debug_assert_eq!(path.len(), self.depth);
        self.values[path_index(path, self.arity)]
    }

    /// Node value at a path of length `<= depth` (plans only).
    pub fn node(&self, path: &[usize]) -> f64 {
        debug_assert_eq!(self.kind, PayloadKind::NodeValues);
        let offset = internal_nodes(self.arity, path.len());
        self.values[offset + path_index(path, self.arity)]
    }

    /// Values at one level of a plan, in lexicographic order.
    pub fn level(&self, t: usize) -> &[f64] {
        debug_assert_eq!(self.kind, PayloadKind::NodeValues);
        let start = internal_nodes(self.arity, t);
        let len = checked_pow(self.arity, t) as usize;
        &self.values[start..start + len]
    }

    /// `xi^{s,1}`: the depth-`T-1` subtree rooted at child `s`.
    pub fn shift(&self, s: usize) -> Result<Self> {
        if self.depth == 0 {
            return Err(Error::ShiftDepthZero);
        }
        if s >= self.arity {
            return Err(Error::OutOfRange { what: "state index", value: s as f64, lo: 0.0, hi: (self.arity - 1) as f64 });
        }
        match self.kind {
            PayloadKind::LeafValues => {
                let block = self.values.len() / self.arity;
                Ok(Self {
                    arity: self.arity,
                    depth: self.depth - 1,
                    kind: self.kind,
                    values: self.values[s * block..(s + 1) * block].to_vec(),
                })
            }
            PayloadKind::NodeValues => Ok(self.continuation(s)),
        }
    }

    /// Continuation plan `h^{s,1}`. A depth-0 plan is its own continuation
    /// (constant tail).
    pub fn continuation(&self, s: usize) -> Self {
        debug_assert_eq!(self.kind, PayloadKind::NodeValues);
        if self.depth == 0 {
            return self.clone();
        }
        let mut values = Vec::with_capacity(internal_nodes(self.arity, self.depth));
        for t in 1..=self.depth {
            let level = self.level(t);
            let block = level.len() / self.arity;
            values.extend_from_slice(&level[s * block..(s + 1) * block]);
        }
        Self { arity: self.arity, depth: self.depth - 1, kind: self.kind, values }
    }

    /// Applies `f` to every stored value, keeping the shape. The result is
    /// range-checked again.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        if self.kind == PayloadKind::LeafValues {
            check_range(&values, 1.0, "leaf value")?;
        }
        Ok(Self { values, ..self.clone() })
    }
}

/// Base-`n` index of a path, most significant step first.
pub fn path_index(path: &[usize], n: usize) -> usize {
    path.iter().fold(0, |acc, &s| acc * n + s)
}

fn check_range(values: &[f64], bound: f64, what: &'static str) -> Result<()> {
    for &v in values {
        if !v.is_finite() || v.abs() > bound + RANGE_TOL {
            return Err(Error::OutOfRange { what, value: v, lo: -bound, hi: bound });
        }
    }
    Ok(())
}

/// Discounted lifetime utility of a plan:
/// leaf `(s_1..s_T)` is `sum_{t<T} beta^t w_t(s^t) + beta^T w_T(s^T) / (1 - beta)`.
pub fn lifetime_utility(plan: &AdaptedTree, scale: &DiscountedUtilityScale) -> Result<AdaptedTree> {
    if plan.kind != PayloadKind::NodeValues {
        return Err(Error::MalformedTree("lifetime utility needs a node-valued plan".into()));
    }
    check_range(&plan.values, scale.period_bound(), "node value")?;
    let n = plan.arity;
    let beta = scale.beta();
    // partial sums level by level
    let mut acc = alloc::vec![plan.values[0]];
    let mut discount = 1.0;
    for t in 1..=plan.depth {
        discount *= beta;
        let level = plan.level(t);
        let mut next = Vec::with_capacity(level.len());
        for (i, &w) in level.iter().enumerate() {
            next.push(acc[i / n] + discount * w);
        }
        acc = next;
    }
    // the last level was added with beta^T; the tail adds beta^{T+1} w_T / (1 - beta)
    let tail_factor = discount * beta / (1.0 - beta);
    let last = plan.level(plan.depth);
    let leaves: Vec<f64> = acc.iter().zip(last).map(|(a, w)| a + tail_factor * w).collect();
    AdaptedTree::leaves_with_cap(n, plan.depth, leaves, usize::MAX)
}

/// Worst-case gap `2 beta^T` between a lifetime utility truncated at depth
/// `T` and any infinite-horizon variable agreeing with it up to `T`.
pub fn truncation_error_bound(depth: usize, scale: &DiscountedUtilityScale) -> f64 {
    2.0 * libm::pow(scale.beta(), depth as f64)
}
