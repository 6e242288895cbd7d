//! Run configuration: JSON with unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{from_json, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Check,
    Lln,
    Bench,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Check => "check",
            Command::Lln => "lln",
            Command::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must agree with the command given on the command line.
    #[serde(default)]
    pub command: Option<Command>,
    pub beta: f64,
    pub states: Vec<String>,
    #[serde(default)]
    pub i_plus_one: Option<SpecDto>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub solve: Option<SolveOptions>,
    #[serde(default)]
    pub check: Option<CheckOptions>,
    #[serde(default)]
    pub lln: Option<LlnOptions>,
    #[serde(default)]
    pub bench: Option<BenchOptions>,
}

/// Priors are listed in state order.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecDto {
    Expectation { prior: Vec<f64> },
    Maxmin { priors: Vec<Vec<f64>> },
    Variational { priors: Vec<Vec<f64>>, costs: Vec<f64> },
    VariationalEntropicGrid { theta: f64, reference: Vec<f64>, mesh: usize },
    Entropic { theta: f64, reference: Vec<f64> },
    /// Keys are state labels concatenated in state order (`"ab"` for
    /// `{a, b}`); the empty set is 0 and the full set defaults to 1.
    Choquet { capacity: BTreeMap<String, f64> },
    RankDependent { prior: Vec<f64>, distortion: DistortionDto },
    Smooth { support: Vec<Vec<f64>>, weights: Vec<f64>, phi: PhiDto },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistortionDto {
    Identity,
    Power { gamma: f64 },
    Prelec { alpha: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiDto {
    Linear,
    Exponential { theta: f64 },
    Power {
        rho: f64,
        #[serde(default)]
        shift: Option<f64>,
    },
}

/// A tree given inline (`depth` plus `leaves` or `nodes`) or by `file`,
/// relative to the configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRef {
    #[serde(default)]
    pub file: Option<String>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub leaves: Option<Vec<f64>>,
    #[serde(default)]
    pub nodes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Nested,
    ValueIteration,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedChoice {
    #[default]
    UniformExpectation,
    IPlusOne,
    Worst,
    Best,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    #[serde(default)]
    pub mode: SolveMode,
    /// Leaf-valued lifetime utilities, evaluated by nested backward induction.
    #[serde(default)]
    pub trees: Vec<TreeRef>,
    /// Node-valued consumption-utility plans.
    #[serde(default)]
    pub plans: Vec<TreeRef>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed_values: SeedChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    pub checks: Vec<CheckDto>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// Pass when the residual is at most the tolerance.
    #[default]
    AtMost,
    /// Pass when the residual exceeds the tolerance (a violation is sought).
    Exceeds,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDto {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub must_pass: bool,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub expect: Expect,
    pub test: TestDto,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    OneStep,
    FixedPointGap,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestDto {
    /// Candidate `I0` against the recursion driven by `i_plus_one`.
    Rectangularity {
        i0: ExAnteDto,
        depth: usize,
        #[serde(default)]
        samples: usize,
        #[serde(default)]
        metric: Metric,
        /// Fixed trees, checked in addition to the random samples.
        #[serde(default)]
        trees: Vec<TreeRef>,
    },
    /// Translation invariance of a one-step model (`i_plus_one` by default).
    TranslationInvariance {
        #[serde(default)]
        spec: Option<SpecDto>,
        samples: usize,
    },
    /// Translation invariance of the ex-ante fixed point of `i_plus_one`.
    ExAnteTranslationInvariance { depth: usize, samples: usize },
    /// Nested maxmin against the minimum over the rectangular hull of the
    /// maxmin priors of `i_plus_one`.
    RectangularHull { depth: usize, samples: usize },
    /// Variational `I0` composed from the entropic grid cost against the
    /// closed-form entropic one-step model.
    Nogain {
        theta: f64,
        mesh: usize,
        depth: usize,
        samples: usize,
        #[serde(default)]
        reference: Option<Vec<f64>>,
    },
    SmoothEntropy {
        theta: f64,
        mu_plus_one: SecondOrderDto,
        mu0: Mu0Dto,
        depth: usize,
        samples: usize,
    },
    ExponentialForm {
        phi: PhiDto,
        support: Vec<Vec<f64>>,
        weights: Vec<f64>,
        samples: usize,
    },
    Sequential {
        phi: PhiDto,
        mu: Vec<f64>,
        /// Blocks of state labels.
        partition: Vec<Vec<String>>,
        payoff: Vec<f64>,
        /// When positive, also probe translation invariance of the
        /// functional and report it alongside.
        #[serde(default)]
        ti_samples: usize,
    },
    /// Nested against value iteration on random plans.
    CrossSolver { depth: usize, samples: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExAnteDto {
    /// The nested fixed point of `i_plus_one` itself.
    Nested,
    /// The nested fixed point of another one-step model.
    NestedSpec { spec: SpecDto },
    ProductExpectation { prior: Vec<f64> },
    ProductEntropic { theta: f64, reference: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SecondOrderDto {
    /// Finite support of first-order priors.
    Explicit { support: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Point masses on the states, weighted by `prior`.
    Dirac { prior: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mu0Dto {
    /// Built from `mu_plus_one` by independent pasting.
    ProductForm,
    /// Path measures (lexicographic path order) with weights.
    Explicit { support: Vec<Vec<f64>>, weights: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnOptions {
    /// Vertex priors; defaults to the priors of a maxmin or expectation
    /// `i_plus_one`.
    #[serde(default)]
    pub vertices: Option<Vec<Vec<f64>>>,
    pub xi: Vec<f64>,
    pub epsilon: f64,
    pub horizons: Vec<usize>,
    pub trials: usize,
    /// `fixed_vertex(i)`, `per_period_random`, `adversarial_low`,
    /// `adversarial_high`; all four (with vertex 0) by default.
    #[serde(default)]
    pub rules: Option<Vec<String>>,
    /// Exit with status 1 when the worst frequency at the longest horizon
    /// falls below this.
    #[serde(default)]
    pub min_frequency: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchOptions {
    pub depths: Vec<usize>,
    /// Models to time; `i_plus_one` when omitted.
    #[serde(default)]
    pub specs: Option<Vec<SpecDto>>,
    #[serde(default = "one")]
    pub plans: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed_values: SeedChoice,
}

fn one() -> usize {
    1
}

/// A parsed configuration together with the directory relative file
/// references resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("CONFIG_READ", format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| from_json(e, &path.display().to_string()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}
