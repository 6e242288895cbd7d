//! Recursive preferences under ambiguity on finite shock spaces.
//!
//! The crate computes ex-ante certainty equivalents `I0` from a one-step-ahead
//! certainty equivalent `I+1` as the unique solution of
//!
//! ```text
//! I0(xi) = beta * I+1( I0(xi^1) / beta )
//! ```
//!
//! on finite-depth adapted trees, either by exact backward (nested) evaluation
//! or by value iteration on the recursive representation
//! `V(h) = u(h0) + beta * I+1(V o h^1)`. Around the solvers sit checkers for the
//! dynamic-consistency restrictions of the common ambiguity models (maxmin
//! rectangularity, variational no-gain, smooth entropy decomposition,
//! exponential form of translation-invariant smooth models) and a small
//! robust law-of-large-numbers experiment.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command-line
//! front end live in the `grect` crate.
//!
//! All utilities are normalized so that per-period utilities lie in
//! `[beta - 1, 1 - beta]` and lifetime utilities in `[-1, 1]`.

#![no_std]

extern crate alloc;

pub mod cequiv;
pub mod consistency;
pub mod error;
pub mod lln;
pub(crate) mod linalg;
pub mod math;
pub mod rng;
pub mod solver;
pub mod space;
pub mod tree;

pub use cequiv::{CeSpec, CertaintyEquivalent, Distortion, Phi, VariationalTable};
pub use error::{Error, Result};
pub use solver::{solve_nested, solve_value_iteration, cross_check, Seed, SolveConfig, SolveReport};
pub use space::{Capacity, DiscountedUtilityScale, Prior, ShockSpace};
pub use tree::{AdaptedTree, PayloadKind};

/// Default cap on the number of leaves `n^T` of an adapted tree.
pub const DEFAULT_MAX_LEAVES: usize = 1 << 20;

/// Width of the numeric band around `[-1, 1]` that every one-step
/// certainty equivalent accepts: arguments of the form `I0(xi^s) / beta`
/// leave the unit box, and the documented working domain is `[-3, 3]`.
pub const DOMAIN_SLACK: f64 = 2.0;

/// Tolerance used for range checks on utilities produced by arithmetic.
pub const RANGE_TOL: f64 = 1e-12;
