use alloc::vec::Vec;

use super::measure::TruncatedMeasure;
use crate::cequiv::CertaintyEquivalent;
use crate::error::{Error, Result};
use crate::math::{checked_pow, internal_nodes};
use crate::rng;
use crate::solver::{solve_nested, SolveConfig};
use crate::space::{DiscountedUtilityScale, Prior};
use crate::tree::AdaptedTree;

/// Largest vertex set built by [`rectangular_hull_vertices`].
pub const MAX_HULL_VERTICES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RectangularityReport {
    pub samples: usize,
    /// Largest one-step residual `|I0(xi) - beta I+1(I0(xi^1) / beta)|`.
    pub residual: f64,
    /// Leaves of the tree attaining `residual`.
    pub worst_case: Vec<f64>,
    /// Largest distance `|I0(xi) - J(xi)|` to the unique solution `J` of the
    /// recursion driven by `I+1`.
    pub fixed_point_gap: f64,
    /// Leaves of the tree attaining `fixed_point_gap`.
    pub gap_worst_case: Vec<f64>,
}

/// One-step residual and fixed-point gap of a candidate `I0` on one tree.
pub fn rectangularity_residual<F, C>(i0: &F, i_plus_one: &C, beta: f64, xi: &AdaptedTree) -> Result<(f64, f64)>
where
    F: Fn(&AdaptedTree) -> Result<f64>,
    C: CertaintyEquivalent,
{
    let n = i_plus_one.arity();
    if xi.arity() != n {
        return Err(Error::ArityMismatch { expected: n, found: xi.arity() });
    }
    let scale = DiscountedUtilityScale::new(beta)?;
    let whole = i0(xi)?;
    let mut inner = Vec::with_capacity(n);
    for s in 0..n {
        inner.push(i0(&xi.shift(s)?)? / beta);
    }
    let residual = (whole - beta * i_plus_one.evaluate(&inner)?).abs();
    let cfg = SolveConfig::new(i_plus_one, scale);
    let gap = (whole - solve_nested(&cfg, xi)?).abs();
    Ok((residual, gap))
}

/// Samples leaf-valued trees uniformly from `[-1, 1]^{n^depth}` and reports
/// how far `i0` is from satisfying the recursion with `i_plus_one`.
pub fn check_generalized_rectangularity<F, C>(
    i0: F,
    i_plus_one: &C,
    beta: f64,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<RectangularityReport>
where
    F: Fn(&AdaptedTree) -> Result<f64>,
    C: CertaintyEquivalent,
{
    if depth == 0 {
        return Err(Error::param("depth", "rectangularity needs depth >= 1"));
    }
    let n = i_plus_one.arity();
    let leaves = checked_pow(n, depth) as usize;
    let mut rng = rng::seeded(seed);
    let mut report =
        RectangularityReport { samples, residual: 0.0, worst_case: Vec::new(), fixed_point_gap: 0.0, gap_worst_case: Vec::new() };
    for _ in 0..samples {
        let values: Vec<f64> = (0..leaves).map(|_| rng::uniform(&mut rng, -1.0, 1.0)).collect();
        let xi = AdaptedTree::leaves(n, depth, values)?;
        let (residual, gap) = rectangularity_residual(&i0, i_plus_one, beta, &xi)?;
        if residual > report.residual || report.worst_case.is_empty() {
            report.residual = residual;
            report.worst_case = xi.values().to_vec();
        }
        if gap > report.fixed_point_gap || report.gap_worst_case.is_empty() {
            report.fixed_point_gap = gap;
            report.gap_worst_case = xi.values().to_vec();
        }
    }
    Ok(report)
}

/// Every depth-`depth` measure obtained by choosing one element of `priors`
/// at each internal node and multiplying along paths.
///
/// The result has `|L|^{(n^T - 1)/(n - 1)}` elements; the order is
/// root choice first, then the vertices of each branch in state order.
pub fn rectangular_hull_vertices(priors: &[Prior], depth: usize) -> Result<Vec<TruncatedMeasure>> {
    let first = priors.first().ok_or_else(|| Error::param("priors", "empty vertex set"))?;
    let n = first.len();
    if priors.iter().any(|p| p.len() != n) {
        return Err(Error::param("priors", "priors have different lengths"));
    }
    let size = hull_size(priors.len(), n, depth);
    if size > MAX_HULL_VERTICES {
        return Err(Error::CapExceeded { what: "rectangular hull", size, cap: MAX_HULL_VERTICES });
    }
    let mut level = alloc::vec![TruncatedMeasure::trivial(n)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(priors.len() * level.len().pow(n as u32));
        let mut pick = alloc::vec![0usize; n];
        for root in priors {
            pick.iter_mut().for_each(|p| *p = 0);
            loop {
                let conts: Vec<TruncatedMeasure> = pick.iter().map(|&i| level[i].clone()).collect();
                next.push(TruncatedMeasure::paste(root, &conts));
                if !advance(&mut pick, level.len()) {
                    break;
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// `min_P E_P[xi]` over [`rectangular_hull_vertices`].
pub fn hull_minimum(priors: &[Prior], xi: &AdaptedTree) -> Result<f64> {
    let vertices = rectangular_hull_vertices(priors, xi.depth())?;
    Ok(vertices.iter().map(|p| p.expectation(xi)).fold(f64::INFINITY, f64::min))
}

fn hull_size(vertices: usize, n: usize, depth: usize) -> u128 {
    let nodes = internal_nodes(n, depth);
    let mut size: u128 = 1;
    for _ in 0..nodes {
        size = size.saturating_mul(vertices as u128);
        if size > MAX_HULL_VERTICES {
            break;
        }
    }
    size
}

/// Odometer increment, last digit fastest. False once it wraps around.
pub(crate) fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cequiv::CeSpec;
    use alloc::vec;

    fn pair() -> Vec<Prior> {
        vec![Prior::new(vec![0.4, 0.6]).unwrap(), Prior::new(vec![0.6, 0.4]).unwrap()]
    }

    #[test]
    fn hull_counts() {
        assert_eq!(rectangular_hull_vertices(&pair(), 2).unwrap().len(), 8);
        assert_eq!(rectangular_hull_vertices(&pair(), 1).unwrap().len(), 2);
        let single = rectangular_hull_vertices(&[Prior::uniform(3)], 2).unwrap();
        assert_eq!(single, vec![TruncatedMeasure::iid(&Prior::uniform(3), 2)]);
        assert!(matches!(rectangular_hull_vertices(&pair(), 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn wrong_pair_on_indicator() {
        let mm = CeSpec::maxmin(pair()).unwrap();
        let xi = AdaptedTree::leaves(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let product = TruncatedMeasure::iid(&Prior::uniform(2), 2);
        let i0 = |t: &AdaptedTree| Ok(TruncatedMeasure::iid(&Prior::uniform(2), t.depth()).expectation(t));
        let (_, gap) = rectangularity_residual(&i0, &mm, 0.5, &xi).unwrap();
        assert!((product.expectation(&xi) - 0.25).abs() < 1e-15);
        assert!((gap - 0.09).abs() < 1e-12);
        assert!((hull_minimum(&pair(), &xi).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn odometer_wraps() {
        let mut d = [1, 1];
        assert!(!advance(&mut d, 2));
        assert_eq!(d, [0, 0]);
    }
}
