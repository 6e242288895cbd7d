//! The `check` command: runs configured consistency tests.

use grect_core::cequiv::{entropic, probe_properties, CeSpec, CertaintyEquivalent};
use grect_core::consistency::{
    check_exponential_form, check_generalized_rectangularity, check_smooth_entropy_condition, hull_minimum,
    induced_functional, nogain_compose, rectangularity_residual, sequential_example_check, CheckReport, CostTable,
    TruncatedMeasure,
};
use grect_core::rng;
use grect_core::solver::{cross_check, solve_nested, SolveConfig};
use grect_core::{AdaptedTree, Prior, VariationalTable};
use serde_json::{json, Map, Value};

use crate::config::{CheckDto, ExAnteDto, Expect, Metric, TestDto};
use crate::error::{CliError, CliResult};
use crate::format::{num, nums};
use crate::model::{self, Context, TreeKind};

/// Raw result of one test before a tolerance is applied.
#[derive(Debug, Clone)]
pub struct Measured {
    pub residual: f64,
    pub witness: Vec<f64>,
    pub details: Map<String, Value>,
}

impl Measured {
    fn new(residual: f64, witness: Vec<f64>) -> Self {
        Self { residual, witness, details: Map::new() }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

pub fn test_kind(test: &TestDto) -> &'static str {
    match test {
        TestDto::Rectangularity { .. } => "rectangularity",
        TestDto::TranslationInvariance { .. } => "translation_invariance",
        TestDto::ExAnteTranslationInvariance { .. } => "ex_ante_translation_invariance",
        TestDto::RectangularHull { .. } => "rectangular_hull",
        TestDto::Nogain { .. } => "nogain",
        TestDto::SmoothEntropy { .. } => "smooth_entropy",
        TestDto::ExponentialForm { .. } => "exponential_form",
        TestDto::Sequential { .. } => "sequential",
        TestDto::CrossSolver { .. } => "cross_solver",
    }
}

/// Default pass threshold per test kind.
pub fn default_tolerance(test: &TestDto) -> f64 {
    match test {
        TestDto::Rectangularity { .. } => 1e-10,
        TestDto::TranslationInvariance { .. } | TestDto::ExAnteTranslationInvariance { .. } => 1e-9,
        TestDto::RectangularHull { .. } => 1e-10,
        TestDto::Nogain { .. } => 5e-3,
        TestDto::SmoothEntropy { .. } => 1e-6,
        TestDto::ExponentialForm { .. } => 1e-10,
        TestDto::Sequential { .. } => 1e-12,
        TestDto::CrossSolver { .. } => 1e-9,
    }
}

/// Whether the test draws random samples and so needs a seed.
pub fn is_randomized(test: &TestDto) -> bool {
    match test {
        TestDto::Rectangularity { samples, .. } => *samples > 0,
        TestDto::Sequential { ti_samples, .. } => *ti_samples > 0,
        _ => true,
    }
}

fn leaf_tree(r: &mut rng::Rng, n: usize, depth: usize, half_width: f64) -> CliResult<AdaptedTree> {
    let count = n.pow(depth as u32);
    Ok(AdaptedTree::leaves(n, depth, (0..count).map(|_| rng::uniform(r, -half_width, half_width)).collect())?)
}

/// Translation invariance and constant absolute ambiguity aversion of the
/// nested fixed point: the largest of `|I0(xi + k) - I0(xi) - k|` and
/// `|I0(a xi + (1 - a) k) - I0(a xi) - (1 - a) k|` over sampled `xi`, `k`, `a`.
pub fn ex_ante_translation_invariance(cfg: &SolveConfig, depth: usize, samples: usize, seed: u64) -> CliResult<Measured> {
    let n = cfg.i_plus_one.arity();
    let mut r = rng::seeded(seed);
    let (mut ti, mut caaa): (f64, f64) = (0.0, 0.0);
    let mut witness = Vec::new();
    for _ in 0..samples {
        let xi = leaf_tree(&mut r, n, depth, 0.5)?;
        let k = rng::uniform(&mut r, -0.5, 0.5);
        let a = rng::unit(&mut r);
        let base = solve_nested(cfg, &xi)?;
        let shifted = solve_nested(cfg, &xi.map(|x| x + k)?)?;
        let scaled = xi.map(|x| a * x)?;
        let mixed = solve_nested(cfg, &xi.map(|x| a * x + (1.0 - a) * k)?)?;
        let v_ti = (shifted - base - k).abs();
        let v_caaa = (mixed - solve_nested(cfg, &scaled)? - (1.0 - a) * k).abs();
        if v_ti.max(v_caaa) > ti.max(caaa) || witness.is_empty() {
            witness = xi.values().to_vec();
            witness.push(k);
        }
        ti = ti.max(v_ti);
        caaa = caaa.max(v_caaa);
    }
    Ok(Measured::new(ti.max(caaa), witness).with("ti_violation", num(ti)).with("caaa_violation", num(caaa)))
}

/// Largest `|nested maxmin - min over the rectangular hull|`.
pub fn rectangular_hull_gap(vertices: &[Prior], beta: f64, depth: usize, samples: usize, seed: u64) -> CliResult<Measured> {
    let spec = CeSpec::maxmin(vertices.to_vec())?;
    let n = spec.arity();
    let cfg = SolveConfig::new(spec, grect_core::DiscountedUtilityScale::new(beta)?);
    let mut r = rng::seeded(seed);
    let mut out = Measured::new(0.0, Vec::new());
    for _ in 0..samples {
        let xi = leaf_tree(&mut r, n, depth, 1.0)?;
        let gap = (solve_nested(&cfg, &xi)? - hull_minimum(vertices, &xi)?).abs();
        if gap > out.residual || out.witness.is_empty() {
            out.residual = gap;
            out.witness = xi.values().to_vec();
        }
    }
    Ok(out)
}

/// One-step rectangularity residual of the variational `I0` composed from
/// the entropic grid cost `R(. || reference) / (theta beta)` against the
/// closed-form entropic `I+1` with parameter `theta beta`.
pub fn nogain_residual(
    theta: f64,
    reference: &Prior,
    mesh: usize,
    beta: f64,
    depth: usize,
    samples: usize,
    seed: u64,
) -> CliResult<Measured> {
    let table = CostTable::from_variational(&VariationalTable::entropic_grid(theta * beta, reference, mesh)?);
    let composed = nogain_compose(&table, beta, depth)?;
    let i_plus_one = CeSpec::entropic(theta * beta, reference.clone())?;
    let report = check_generalized_rectangularity(|xi| composed.evaluate(xi), &i_plus_one, beta, depth, samples, seed)?;
    Ok(Measured::new(report.residual, report.worst_case)
        .with("fixed_point_gap", num(report.fixed_point_gap))
        .with("domain_size", Value::String(composed.len().to_string())))
}

/// Largest `|nested - value iteration|` over random plans.
pub fn cross_solver_gap(cfg: &SolveConfig, depth: usize, samples: usize, seed: u64) -> CliResult<Measured> {
    let n = cfg.i_plus_one.arity();
    let bound = cfg.scale.period_bound();
    let nodes = grect_core::math::internal_nodes(n, depth + 1);
    let mut r = rng::seeded(seed);
    let mut out = Measured::new(0.0, Vec::new());
    for _ in 0..samples {
        let plan = AdaptedTree::plan(n, depth, (0..nodes).map(|_| rng::uniform(&mut r, -bound, bound)).collect(), &cfg.scale)?;
        let gap = cross_check(cfg, &plan)?;
        if gap > out.residual || out.witness.is_empty() {
            out.residual = gap;
            out.witness = plan.values().to_vec();
        }
    }
    Ok(out)
}

fn ex_ante(dto: &ExAnteDto, i_plus_one: &CeSpec, ctx: &Context) -> CliResult<Box<dyn Fn(&AdaptedTree) -> grect_core::Result<f64>>> {
    let n = ctx.states();
    let scale = ctx.scale;
    Ok(match dto {
        ExAnteDto::Nested => {
            let cfg = SolveConfig::new(i_plus_one.clone(), scale);
            Box::new(move |xi| solve_nested(&cfg, xi))
        }
        ExAnteDto::NestedSpec { spec } => {
            let cfg = SolveConfig::new(model::spec(spec, &ctx.space)?, scale);
            Box::new(move |xi| solve_nested(&cfg, xi))
        }
        ExAnteDto::ProductExpectation { prior } => {
            let p = model::prior(prior, n)?;
            Box::new(move |xi| Ok(TruncatedMeasure::iid(&p, xi.depth()).expectation(xi)))
        }
        ExAnteDto::ProductEntropic { theta, reference } => {
            let p = model::prior(reference, n)?;
            let theta = *theta;
            if !(theta.is_finite() && theta > 0.0) {
                return Err(grect_core::Error::InvalidParameter { name: "theta", reason: "theta must be positive".into() }.into());
            }
            Box::new(move |xi| {
                let path = Prior::new(TruncatedMeasure::iid(&p, xi.depth()).weights().to_vec())?;
                Ok(entropic(theta, &path, xi.values()))
            })
        }
    })
}

fn need<'a>(spec: Option<&'a CeSpec>) -> CliResult<&'a CeSpec> {
    spec.ok_or_else(|| CliError::config("MISSING_SPEC", "this check needs `i_plus_one`"))
}

pub fn measure(test: &TestDto, ctx: &Context, i_plus_one: Option<&CeSpec>, seed: u64) -> CliResult<Measured> {
    let n = ctx.states();
    let beta = ctx.beta();
    match test {
        TestDto::Rectangularity { i0, depth, samples, metric, trees } => {
            let spec = need(i_plus_one)?;
            let f = ex_ante(i0, spec, ctx)?;
            let mut worst = (0.0, Vec::new(), 0.0, Vec::new());
            if *samples > 0 {
                let r = check_generalized_rectangularity(&f, spec, beta, *depth, *samples, seed)?;
                worst = (r.residual, r.worst_case, r.fixed_point_gap, r.gap_worst_case);
            }
            for t in trees {
                let xi = model::tree(t, TreeKind::Leaves, ctx)?;
                let (res, gap) = rectangularity_residual(&f, spec, beta, &xi)?;
                if res > worst.0 || worst.1.is_empty() {
                    worst.0 = res;
                    worst.1 = xi.values().to_vec();
                }
                if gap > worst.2 || worst.3.is_empty() {
                    worst.2 = gap;
                    worst.3 = xi.values().to_vec();
                }
            }
            let (residual, witness) = match metric {
                Metric::OneStep => (worst.0, worst.1),
                Metric::FixedPointGap => (worst.2, worst.3),
            };
            Ok(Measured::new(residual, witness).with("one_step_residual", num(worst.0)).with("fixed_point_gap", num(worst.2)))
        }
        TestDto::TranslationInvariance { spec, samples } => {
            let spec = match spec {
                Some(dto) => model::spec(dto, &ctx.space)?,
                None => need(i_plus_one)?.clone(),
            };
            let p = probe_properties(&spec, *samples, seed)?;
            let mut witness = p.ti_witness.xi.clone();
            witness.push(p.ti_witness.k);
            Ok(Measured::new(p.ti_witness.violation, witness)
                .with("monotone_violation", num(p.monotone.violation))
                .with("normalization_violation", num(p.normalized.violation))
                .with("concavity_violation", num(p.concave.violation)))
        }
        TestDto::ExAnteTranslationInvariance { depth, samples } => {
            let cfg = SolveConfig::new(need(i_plus_one)?.clone(), ctx.scale).with_max_leaves(ctx.max_leaves);
            ex_ante_translation_invariance(&cfg, *depth, *samples, seed)
        }
        TestDto::RectangularHull { depth, samples } => match need(i_plus_one)? {
            CeSpec::Maxmin(vertices) => rectangular_hull_gap(vertices, beta, *depth, *samples, seed),
            _ => Err(CliError::config("INVALID_PARAMETER", "rectangular_hull needs a maxmin `i_plus_one`")),
        },
        TestDto::Nogain { theta, mesh, depth, samples, reference } => {
            let reference = match reference {
                Some(w) => model::prior(w, n)?,
                None => Prior::uniform(n),
            };
            nogain_residual(*theta, &reference, *mesh, beta, *depth, *samples, seed)
        }
        TestDto::SmoothEntropy { theta, mu_plus_one, mu0, depth, samples } => {
            let mu1 = model::second_order(mu_plus_one, n)?;
            let mu0 = model::mu0(mu0, &mu1, *depth, n)?;
            let r = check_smooth_entropy_condition(&mu0, &mu1, *theta, beta, *samples, seed)?;
            Ok(Measured::new(r.gap, r.worst_measure)
                .with("evaluated", json!(r.evaluated))
                .with("skipped_infeasible", json!(r.skipped))
                .with("dropped_branches", json!(r.dropped_branches))
                .with("rectangularity_residual", num(r.rectangularity.residual)))
        }
        TestDto::ExponentialForm { phi, support, weights, samples } => {
            let support = model::priors(support, n)?;
            let weights = Prior::new(weights.clone())?;
            let r = check_exponential_form(&model::phi(phi)?, &support, &weights, *samples, seed)?;
            let mut witness = r.witness.xi.clone();
            witness.push(r.witness.k);
            Ok(Measured::new(r.ti_violation, witness)
                .with("is_exponential_or_linear", json!(r.is_exponential_or_linear))
                .with("inconclusive", json!(r.inconclusive)))
        }
        TestDto::Sequential { phi, mu, partition, payoff, ti_samples } => {
            let phi = model::phi(phi)?;
            let mu = model::prior(mu, n)?;
            let blocks = partition
                .iter()
                .map(|b| b.iter().map(|l| ctx.state(l)).collect::<CliResult<Vec<_>>>())
                .collect::<CliResult<Vec<_>>>()?;
            let r = sequential_example_check(&phi, &mu, &blocks, payoff)?;
            let mut out = Measured::new(r.discrepancy, payoff.clone())
                .with("ex_ante", num(r.ex_ante))
                .with("iterated", num(r.iterated))
                .with("conditional", nums(&r.conditional));
            if *ti_samples > 0 {
                let p = probe_properties(&induced_functional(&phi, &mu)?, *ti_samples, seed)?;
                out = out.with("ti_violation", num(p.ti_witness.violation));
            }
            Ok(out)
        }
        TestDto::CrossSolver { depth, samples } => {
            let cfg = SolveConfig::new(need(i_plus_one)?.clone(), ctx.scale).with_max_leaves(ctx.max_leaves);
            cross_solver_gap(&cfg, *depth, *samples, seed)
        }
    }
}

/// Applies the tolerance and direction of a configured check.
pub fn judge(dto: &CheckDto, measured: &Measured) -> CheckReport {
    let kind = test_kind(&dto.test);
    let tol = dto.tolerance.unwrap_or_else(|| default_tolerance(&dto.test));
    match dto.expect {
        Expect::AtMost => CheckReport::at_most(kind, measured.residual, measured.witness.clone(), tol),
        Expect::Exceeds => CheckReport::exceeds(kind, measured.residual, measured.witness.clone(), tol),
    }
}
