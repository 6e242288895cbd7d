//! Recursivity in sequential choice: a smooth functional with Dirac
//! first-order priors and Bayes-updated conditionals on the blocks of a
//! partition is recursive for every strictly increasing `phi`.

use alloc::format;
use alloc::vec::Vec;

use crate::cequiv::{CeSpec, CertaintyEquivalent, Phi};
use crate::error::{Error, Result};
use crate::space::Prior;

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialReport {
    /// `I(f)`.
    pub ex_ante: f64,
    /// `I(Ibar(., f))`.
    pub iterated: f64,
    /// `Ibar(w, f)` for every state `w`.
    pub conditional: Vec<f64>,
    pub discrepancy: f64,
}

/// `f -> phi^-1(sum_w mu(w) phi(f(w)))` as a smooth model.
pub fn induced_functional(phi: &Phi, mu: &Prior) -> Result<CeSpec> {
    let n = mu.len();
    CeSpec::smooth((0..n).map(|s| Prior::dirac(n, s)).collect(), mu.clone(), phi.clone())
}

/// Evaluates both sides of `I(f) = I(Ibar(., f))`, where `Ibar(w, .)` is the
/// induced functional under `mu(. | E)` for the block `E` containing `w`.
pub fn sequential_example_check(phi: &Phi, mu: &Prior, partition: &[Vec<usize>], payoff: &[f64]) -> Result<SequentialReport> {
    let n = mu.len();
    if payoff.len() != n {
        return Err(Error::ArityMismatch { expected: n, found: payoff.len() });
    }
    let owner = validate_partition(partition, n)?;
    let ex_ante_ce = induced_functional(phi, mu)?;
    let mut block_values = Vec::with_capacity(partition.len());
    for (b, block) in partition.iter().enumerate() {
        let mass: f64 = block.iter().map(|&s| mu.weights()[s]).sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityBlock(b));
        }
        let mut w = alloc::vec![0.0; n];
        for &s in block {
            w[s] = mu.weights()[s] / mass;
        }
        let conditional = induced_functional(phi, &Prior::new(w)?)?;
        block_values.push(conditional.evaluate(payoff)?);
    }
    let conditional: Vec<f64> = owner.iter().map(|&b| block_values[b]).collect();
    let ex_ante = ex_ante_ce.evaluate(payoff)?;
    let iterated = ex_ante_ce.evaluate(&conditional)?;
    Ok(SequentialReport { ex_ante, iterated, conditional, discrepancy: (ex_ante - iterated).abs() })
}

/// Block index of every state; blocks must be non-empty, disjoint and cover
/// all states.
fn validate_partition(partition: &[Vec<usize>], n: usize) -> Result<Vec<usize>> {
    let mut owner = alloc::vec![usize::MAX; n];
    for (b, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("block {b} is empty")));
        }
        for &s in block {
            if s >= n {
                return Err(Error::InvalidPartition(format!("state {s} does not exist")));
            }
            if owner[s] != usize::MAX {
                return Err(Error::InvalidPartition(format!("state {s} appears twice")));
            }
            owner[s] = b;
        }
    }
    if let Some(s) = owner.iter().position(|&b| b == usize::MAX) {
        return Err(Error::InvalidPartition(format!("state {s} is not covered")));
    }
    Ok(owner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const F: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

    #[test]
    fn single_block_is_exact() {
        let r = sequential_example_check(&Phi::power(0.5), &Prior::uniform(4), &[vec![0, 1, 2, 3]], &F).unwrap();
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn two_blocks_any_phi() {
        let blocks = [vec![0, 1], vec![2, 3]];
        let mu = Prior::uniform(4);
        for phi in [Phi::power(0.5), Phi::Linear, Phi::Exponential { theta: 1.5 }] {
            let r = sequential_example_check(&phi, &mu, &blocks, &F).unwrap();
            assert!(r.discrepancy <= 1e-12, "{phi:?}: {}", r.discrepancy);
        }
    }

    #[test]
    fn partition_errors() {
        let mu = Prior::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let phi = Phi::Linear;
        assert_eq!(
            sequential_example_check(&phi, &mu, &[vec![0, 1], vec![2, 3]], &F),
            Err(Error::ZeroProbabilityBlock(1))
        );
        assert!(matches!(
            sequential_example_check(&phi, &mu, &[vec![0, 1], vec![1, 2, 3]], &F),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(sequential_example_check(&phi, &mu, &[vec![0, 1, 2]], &F), Err(Error::InvalidPartition(_))));
    }
}
