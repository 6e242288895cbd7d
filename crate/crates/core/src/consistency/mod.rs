//! Numeric checkers for dynamic consistency of `(I0, I+1)` pairs and for the
//! attitude restrictions they imply.

mod entropy;
mod measure;
mod nogain;
mod rectangular;
mod sequential;
mod smooth;

use alloc::string::String;
use alloc::vec::Vec;

pub use entropy::{entropy_projection, Projection, FEASIBILITY_TOL, GRADIENT_TOL};
pub use measure::TruncatedMeasure;
pub use nogain::{nogain_compose, CostTable, NoGainComposition, MAX_PATHS, MAX_SCAN, MAX_TABLE_ROWS};
pub use rectangular::{
    check_generalized_rectangularity, hull_minimum, rectangular_hull_vertices, rectangularity_residual,
    RectangularityReport, MAX_HULL_VERTICES,
};
pub use sequential::{induced_functional, sequential_example_check, SequentialReport};
pub use smooth::{
    check_exponential_form, check_smooth_entropy_condition, product_form_prior, ExponentialFormReport,
    SecondOrderPrior, SmoothEntropyReport, MAX_SUPPORT, TI_EXACT_TOL,
};

/// Outcome of one check in machine-readable form.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub residual: f64,
    pub worst_case_input: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Passes when `residual <= tolerance`.
    pub fn at_most(check: impl Into<String>, residual: f64, worst_case_input: Vec<f64>, tolerance: f64) -> Self {
        Self { check: check.into(), residual, worst_case_input, tolerance, pass: residual <= tolerance }
    }

    /// Passes when `residual > tolerance`: the check is looking for a
    /// violation and the tolerance is the size it must exceed.
    pub fn exceeds(check: impl Into<String>, residual: f64, worst_case_input: Vec<f64>, tolerance: f64) -> Self {
        Self { check: check.into(), residual, worst_case_input, tolerance, pass: residual > tolerance }
    }
}
