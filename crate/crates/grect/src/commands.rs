//! Command dispatch: load a configuration, run, write artifacts.

use std::path::PathBuf;
use std::time::Instant;

use grect_core::lln::{coverage_experiment, SelectionRule};
use grect_core::rng;
use grect_core::solver::{solve_nested, solve_value_iteration_from, SolveConfig, SolveReport};
use grect_core::tree::lifetime_utility;
use grect_core::{AdaptedTree, CeSpec, Prior};
use serde_json::{json, Value};

use crate::checks;
use crate::config::{self, Command, Expect, RunConfig, SolveMode};
use crate::error::{CliError, CliResult};
use crate::format::{human, num, nums, sci};
use crate::model::{self, Context, TreeKind};
use crate::output::{write_csv, write_json};

#[derive(Debug, Clone)]
pub struct Options {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    /// Overrides the configured seed.
    pub seed: Option<u64>,
}

/// Result of a successful run: exit status (0, or 1 for a failed must-pass
/// check) and the human summary.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub status: i32,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn run(opts: &Options) -> CliResult<Outcome> {
    let loaded = config::load(&opts.config)?;
    let cfg = &loaded.config;
    if let Some(c) = cfg.command {
        if c != opts.command {
            return Err(CliError::config(
                "COMMAND_MISMATCH",
                format!("configuration is for `{}`, not `{}`", c.name(), opts.command.name()),
            ));
        }
    }
    let ctx = Context::new(cfg, &loaded.base_dir)?;
    let seed = opts.seed.or(cfg.seed);
    match opts.command {
        Command::Solve => solve(cfg, &ctx, opts),
        Command::Check => check(cfg, &ctx, opts, seed),
        Command::Lln => lln(cfg, &ctx, opts, seed),
        Command::Bench => bench(cfg, &ctx, opts, seed),
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    s.as_ref().ok_or_else(|| CliError::config("MISSING_SECTION", format!("this command needs a `{name}` section")))
}

fn require_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::config("MISSING_SEED", "randomized command needs `seed` in the configuration or --seed"))
}

fn solve_config(spec: CeSpec, ctx: &Context, tol: Option<f64>, max_iter: Option<usize>) -> CliResult<SolveConfig> {
    let mut cfg = SolveConfig::new(spec, ctx.scale).with_max_leaves(ctx.max_leaves);
    if let Some(t) = tol {
        cfg = cfg.with_tol(t);
    }
    if let Some(m) = max_iter {
        cfg = cfg.with_max_iter(m);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn header(cfg: &RunConfig, command: Command) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command.name()));
    m.insert("beta".into(), num(cfg.beta));
    m.insert("states".into(), json!(cfg.states));
    m
}

fn report_json(report: &SolveReport, seed: &str, tol: f64) -> Value {
    json!({
        "seed_values": seed,
        "iterations": report.iterations,
        "converged": report.converged,
        "uniqueness_guaranteed": report.uniqueness_guaranteed,
        "tol": num(tol),
        "max_contraction_ratio": num(report.max_contraction_ratio()),
        "truncation_bound": num(report.truncation_bound),
        "residuals": nums(&report.residuals),
        "contraction_ratios": nums(&report.contraction_ratios),
    })
}

fn iteration_rows(report: &SolveReport) -> Vec<Vec<String>> {
    report
        .residuals
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let ratio = match k.checked_sub(1).map(|j| report.residuals[j]) {
                Some(prev) if prev > 0.0 => sci(r / prev),
                _ => String::new(),
            };
            vec![(k + 1).to_string(), sci(*r), ratio]
        })
        .collect()
}

fn seed_name(choice: config::SeedChoice) -> &'static str {
    match choice {
        config::SeedChoice::UniformExpectation => "uniform_expectation",
        config::SeedChoice::IPlusOne => "i_plus_one",
        config::SeedChoice::Worst => "worst",
        config::SeedChoice::Best => "best",
    }
}

fn solve(cfg: &RunConfig, ctx: &Context, opts: &Options) -> CliResult<Outcome> {
    let s = section(&cfg.solve, "solve")?;
    let spec = model::i_plus_one(cfg, ctx)?;
    let scfg = solve_config(spec.clone(), ctx, s.tol, s.max_iter)?;
    let trees = s.trees.iter().map(|t| model::tree(t, TreeKind::Leaves, ctx)).collect::<CliResult<Vec<_>>>()?;
    let plans = s.plans.iter().map(|t| model::tree(t, TreeKind::Plan, ctx)).collect::<CliResult<Vec<_>>>()?;
    if trees.is_empty() && plans.is_empty() {
        return Err(CliError::config("NO_INPUTS", "`solve` needs at least one tree or plan"));
    }
    let mut outcome = Outcome::default();

    let mut tree_rows = Vec::new();
    for (i, xi) in trees.iter().enumerate() {
        let v = solve_nested(&scfg, xi)?;
        outcome.lines.push(format!("tree {i}: I0 = {}", human(v)));
        tree_rows.push(json!({ "index": i, "depth": xi.depth(), "value": num(v) }));
    }

    let nested: Vec<Option<f64>> = plans
        .iter()
        .map(|p| match s.mode {
            SolveMode::ValueIteration => Ok(None),
            _ => Ok(Some(solve_nested(&scfg, &lifetime_utility(p, &ctx.scale)?)?)),
        })
        .collect::<CliResult<_>>()?;
    let report = if s.mode != SolveMode::Nested && !plans.is_empty() {
        Some(solve_value_iteration_from(&scfg, &plans, &model::seed(s.seed_values, &spec))?)
    } else {
        None
    };
    let mut plan_rows = Vec::new();
    for (i, p) in plans.iter().enumerate() {
        let vi = report.as_ref().map(|r| r.values[i]);
        let mut row = json!({ "index": i, "depth": p.depth() });
        let mut line = format!("plan {i}:");
        if let Some(v) = nested[i] {
            row["nested"] = num(v);
            line.push_str(&format!(" nested = {}", human(v)));
        }
        if let Some(v) = vi {
            row["value_iteration"] = num(v);
            line.push_str(&format!(" value iteration = {}", human(v)));
        }
        if let (Some(a), Some(b)) = (nested[i], vi) {
            row["discrepancy"] = num((a - b).abs());
        }
        plan_rows.push(row);
        outcome.lines.push(line);
    }

    let mut doc = header(cfg, Command::Solve);
    doc.insert("spec".into(), json!(spec.kind()));
    doc.insert("trees".into(), Value::Array(tree_rows));
    doc.insert("plans".into(), Value::Array(plan_rows));
    match &report {
        Some(r) => {
            doc.insert("value_iteration".into(), report_json(r, seed_name(s.seed_values), scfg.tol));
            write_csv(&opts.out, "solve_iterations.csv", &["iteration", "residual", "ratio"], &iteration_rows(r))?;
            outcome.lines.push(format!(
                "value iteration: {} iterations, max contraction ratio {}",
                r.iterations,
                human(r.max_contraction_ratio())
            ));
            if !r.converged {
                outcome.warnings.push(format!("value iteration did not reach tol {} in {} iterations", sci(scfg.tol), r.iterations));
            }
            if !r.uniqueness_guaranteed {
                outcome.warnings.push("one-step model is not translation invariant; the fixed point need not be unique".into());
            }
        }
        None => {
            doc.insert("value_iteration".into(), Value::Null);
        }
    }
    write_json(&opts.out, "solve.json", &Value::Object(doc))?;
    Ok(outcome)
}

fn check(cfg: &RunConfig, ctx: &Context, opts: &Options, seed: Option<u64>) -> CliResult<Outcome> {
    let s = section(&cfg.check, "check")?;
    let spec = cfg.i_plus_one.as_ref().map(|d| model::spec(d, &ctx.space)).transpose()?;
    let seed = if s.checks.iter().any(|c| checks::is_randomized(&c.test)) { Some(require_seed(seed)?) } else { seed };
    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for (i, c) in s.checks.iter().enumerate() {
        let measured = checks::measure(&c.test, ctx, spec.as_ref(), seed.unwrap_or(0))?;
        let report = checks::judge(c, &measured);
        let name = c.name.clone().unwrap_or_else(|| format!("{}-{i}", report.check));
        all_pass &= report.pass;
        if c.must_pass && !report.pass {
            outcome.status = 1;
        }
        let relation = match (c.expect, report.pass) {
            (Expect::AtMost, true) | (Expect::Exceeds, false) => "<=",
            _ => ">",
        };
        outcome.lines.push(format!(
            "{} {name}: residual {} {relation} {}",
            if report.pass { "PASS" } else { "FAIL" },
            human(report.residual),
            human(report.tolerance)
        ));
        rows.push(json!({
            "name": name,
            "check": report.check,
            "residual": num(report.residual),
            "tolerance": num(report.tolerance),
            "expect": match c.expect { Expect::AtMost => "at_most", Expect::Exceeds => "exceeds" },
            "pass": report.pass,
            "must_pass": c.must_pass,
            "worst_case_input": nums(&report.worst_case_input),
            "details": Value::Object(measured.details),
        }));
    }
    let mut doc = header(cfg, Command::Check);
    doc.insert("seed".into(), seed.map_or(Value::Null, |x| json!(x)));
    doc.insert("checks".into(), Value::Array(rows));
    doc.insert("all_pass".into(), json!(all_pass));
    write_json(&opts.out, "checks.json", &Value::Object(doc))?;
    Ok(outcome)
}

/// Parses `fixed_vertex(i)`, `per_period_random`, `adversarial_low` or
/// `adversarial_high`.
pub fn parse_rule(text: &str) -> CliResult<SelectionRule> {
    let bad = || CliError::config("UNKNOWN_RULE", format!("unknown selection rule `{text}`"));
    match text {
        "per_period_random" => Ok(SelectionRule::PerPeriodRandom),
        "adversarial_low" => Ok(SelectionRule::AdversarialLow),
        "adversarial_high" => Ok(SelectionRule::AdversarialHigh),
        _ => {
            let inner = text.strip_prefix("fixed_vertex(").and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
            Ok(SelectionRule::FixedVertex(inner.trim().parse().map_err(|_| bad())?))
        }
    }
}

fn lln(cfg: &RunConfig, ctx: &Context, opts: &Options, seed: Option<u64>) -> CliResult<Outcome> {
    let s = section(&cfg.lln, "lln")?;
    let seed = require_seed(seed)?;
    let n = ctx.states();
    let vertices: Vec<Prior> = match &s.vertices {
        Some(v) => model::priors(v, n)?,
        None => match model::i_plus_one(cfg, ctx)? {
            CeSpec::Maxmin(l) => l,
            CeSpec::Expectation(p) => vec![p],
            _ => return Err(CliError::config("MISSING_SPEC", "`lln` needs `vertices` or a maxmin/expectation `i_plus_one`")),
        },
    };
    let rules = match &s.rules {
        Some(list) => list.iter().map(|r| parse_rule(r)).collect::<CliResult<Vec<_>>>()?,
        None => vec![
            SelectionRule::FixedVertex(0),
            SelectionRule::PerPeriodRandom,
            SelectionRule::AdversarialLow,
            SelectionRule::AdversarialHigh,
        ],
    };
    if s.xi.len() != n {
        return Err(grect_core::Error::ArityMismatch { expected: n, found: s.xi.len() }.into());
    }
    let table = coverage_experiment(&vertices, &rules, &s.xi, s.epsilon, &s.horizons, s.trials, seed)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.rule.clone(),
                r.horizon.to_string(),
                r.trials.to_string(),
                sci(r.frequency),
                sci(r.lower),
                sci(r.upper),
                sci(r.epsilon),
                r.seed.to_string(),
            ]
        })
        .collect();
    write_csv(
        &opts.out,
        "lln.csv",
        &["rule", "horizon", "trials", "frequency", "lower", "upper", "epsilon", "seed"],
        &rows,
    )?;
    let means: Vec<Value> = rules
        .iter()
        .map(|r| json!({ "rule": r.label(), "exact_mean": r.exact_mean(&vertices, &s.xi).map_or(Value::Null, num) }))
        .collect();
    let mut doc = header(cfg, Command::Lln);
    doc.insert("seed".into(), json!(seed));
    doc.insert("finite_horizon_surrogate".into(), json!(true));
    doc.insert("lower".into(), num(table.rows[0].lower));
    doc.insert("upper".into(), num(table.rows[0].upper));
    doc.insert("worst_frequency".into(), num(table.worst_frequency));
    doc.insert("exact_means".into(), Value::Array(means));
    write_json(&opts.out, "lln.json", &Value::Object(doc))?;

    let mut outcome = Outcome::default();
    outcome.lines.push(format!(
        "bounds [{}, {}], worst coverage frequency {} (epsilon {})",
        human(table.rows[0].lower),
        human(table.rows[0].upper),
        human(table.worst_frequency),
        human(s.epsilon)
    ));
    if let Some(min) = s.min_frequency {
        let longest = s.horizons.iter().copied().max().unwrap_or(0);
        let final_worst =
            table.rows.iter().filter(|r| r.horizon == longest).map(|r| r.frequency).fold(1.0, f64::min);
        if final_worst < min {
            outcome.status = 1;
            outcome.lines.push(format!("FAIL frequency {} at horizon {longest} is below {}", human(final_worst), human(min)));
        } else {
            outcome.lines.push(format!("PASS frequency {} at horizon {longest}", human(final_worst)));
        }
    }
    Ok(outcome)
}

fn random_plan(r: &mut rng::Rng, ctx: &Context, depth: usize) -> CliResult<AdaptedTree> {
    let n = ctx.states();
    let bound = ctx.scale.period_bound();
    let nodes = grect_core::math::internal_nodes(n, depth + 1);
    Ok(AdaptedTree::plan_with_cap(
        n,
        depth,
        (0..nodes).map(|_| rng::uniform(r, -bound, bound)).collect(),
        &ctx.scale,
        ctx.max_leaves,
    )?)
}

fn bench(cfg: &RunConfig, ctx: &Context, opts: &Options, seed: Option<u64>) -> CliResult<Outcome> {
    let s = section(&cfg.bench, "bench")?;
    let seed = require_seed(seed)?;
    let dtos = match &s.specs {
        Some(list) => list.clone(),
        None => vec![section(&cfg.i_plus_one, "i_plus_one")?.clone()],
    };
    if s.plans == 0 {
        return Err(CliError::config("INVALID_PARAMETER", "`plans` must be at least 1"));
    }
    let mut rows = Vec::new();
    let mut outcome = Outcome::default();
    for (si, dto) in dtos.iter().enumerate() {
        let spec = model::spec(dto, &ctx.space)?;
        let scfg = solve_config(spec.clone(), ctx, s.tol, s.max_iter)?;
        for &depth in &s.depths {
            let mut r = rng::substream(seed, ((si as u64) << 32) | depth as u64);
            let plans = (0..s.plans).map(|_| random_plan(&mut r, ctx, depth)).collect::<CliResult<Vec<_>>>()?;
            let start = Instant::now();
            let report = solve_value_iteration_from(&scfg, &plans, &model::seed(s.seed_values, &spec))?;
            let wall = start.elapsed().as_secs_f64();
            if !report.converged {
                outcome.warnings.push(format!("{} at depth {depth} did not converge", model::spec_kind(dto)));
            }
            rows.push(vec![
                depth.to_string(),
                ctx.states().to_string(),
                model::spec_kind(dto).to_string(),
                report.iterations.to_string(),
                sci(wall),
                sci(report.max_contraction_ratio()),
            ]);
        }
    }
    write_csv(
        &opts.out,
        "bench.csv",
        &["depth", "states", "spec", "iterations", "wall_time_s", "contraction_ratio"],
        &rows,
    )?;
    outcome.lines.push(format!("{} benchmark rows written", rows.len()));
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_parse() {
        assert_eq!(parse_rule("fixed_vertex(2)").unwrap(), SelectionRule::FixedVertex(2));
        assert_eq!(parse_rule("adversarial_low").unwrap(), SelectionRule::AdversarialLow);
        assert_eq!(parse_rule("fixed_vertex(x)").unwrap_err().code(), "UNKNOWN_RULE");
        assert_eq!(parse_rule("greedy").unwrap_err().code(), "UNKNOWN_RULE");
    }
}
