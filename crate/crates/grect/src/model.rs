//! Conversion of configuration records into core model types.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use grect_core::cequiv::DEFAULT_POWER_SHIFT;
use grect_core::consistency::{product_form_prior, SecondOrderPrior, TruncatedMeasure};
use grect_core::solver::Seed;
use grect_core::{AdaptedTree, Capacity, CeSpec, DiscountedUtilityScale, Distortion, Phi, Prior, ShockSpace, VariationalTable};
use serde::Deserialize;

use crate::config::{DistortionDto, Mu0Dto, PhiDto, RunConfig, SecondOrderDto, SeedChoice, SpecDto, TreeRef};
use crate::error::{from_json, CliError, CliResult};

/// Environment variable overriding the leaf cap.
pub const MAX_LEAVES_ENV: &str = "RECT_MAX_LEAVES";

/// Validated run-wide settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub space: ShockSpace,
    pub scale: DiscountedUtilityScale,
    pub max_leaves: usize,
    pub base_dir: PathBuf,
}

impl Context {
    pub fn new(config: &RunConfig, base_dir: &Path) -> CliResult<Self> {
        let scale = DiscountedUtilityScale::new(config.beta)?;
        let space = ShockSpace::new(config.states.iter().cloned())?;
        Ok(Self { space, scale, max_leaves: max_leaves()?, base_dir: base_dir.to_path_buf() })
    }

    pub fn beta(&self) -> f64 {
        self.scale.beta()
    }

    pub fn states(&self) -> usize {
        self.space.len()
    }

    pub fn state(&self, label: &str) -> CliResult<usize> {
        self.space
            .index_of(label)
            .ok_or_else(|| CliError::config("UNKNOWN_STATE", format!("state `{label}` is not declared in `states`")))
    }
}

fn max_leaves() -> CliResult<usize> {
    match std::env::var(MAX_LEAVES_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|x| *x > 0)
            .ok_or_else(|| CliError::config("INVALID_ENV", format!("{MAX_LEAVES_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(grect_core::DEFAULT_MAX_LEAVES),
    }
}

pub fn prior(weights: &[f64], n: usize) -> CliResult<Prior> {
    if weights.len() != n {
        return Err(grect_core::Error::ArityMismatch { expected: n, found: weights.len() }.into());
    }
    Ok(Prior::new(weights.to_vec())?)
}

pub fn priors(list: &[Vec<f64>], n: usize) -> CliResult<Vec<Prior>> {
    if list.is_empty() {
        return Err(CliError::config("INVALID_PRIOR", "prior list is empty"));
    }
    list.iter().map(|w| prior(w, n)).collect()
}

/// Second-order weights: a probability vector of any length.
fn weights(w: &[f64]) -> CliResult<Prior> {
    Ok(Prior::new(w.to_vec())?)
}

pub fn phi(dto: &PhiDto) -> CliResult<Phi> {
    let phi = match *dto {
        PhiDto::Linear => Phi::Linear,
        PhiDto::Exponential { theta } => Phi::Exponential { theta },
        PhiDto::Power { rho, shift } => Phi::Power { rho, shift: shift.unwrap_or(DEFAULT_POWER_SHIFT) },
    };
    phi.validate()?;
    Ok(phi)
}

fn distortion(dto: &DistortionDto) -> Distortion {
    match *dto {
        DistortionDto::Identity => Distortion::Identity,
        DistortionDto::Power { gamma } => Distortion::Power { gamma },
        DistortionDto::Prelec { alpha } => Distortion::Prelec { alpha },
    }
}

/// Capacity from label-keyed subset values. Keys are matched against the
/// canonical key of every non-empty subset; a key shared by two subsets is
/// rejected.
pub fn capacity(space: &ShockSpace, table: &BTreeMap<String, f64>) -> CliResult<Capacity> {
    let n = space.len();
    if n > grect_core::space::MAX_CAPACITY_STATES {
        return Err(grect_core::Error::CapExceeded {
            what: "capacity state count",
            size: n as u128,
            cap: grect_core::space::MAX_CAPACITY_STATES as u128,
        }
        .into());
    }
    let full = space.full_mask();
    let mut by_key: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for mask in 1..=full {
        by_key.entry(space.subset_key(mask)).or_default().push(mask);
    }
    let mut values = vec![f64::NAN; full as usize + 1];
    values[0] = 0.0;
    values[full as usize] = 1.0;
    for (key, v) in table {
        let masks = by_key
            .get(key)
            .ok_or_else(|| CliError::config("INVALID_CAPACITY", format!("capacity key `{key}` names no subset of the states")))?;
        if masks.len() > 1 {
            return Err(CliError::config("INVALID_CAPACITY", format!("capacity key `{key}` is ambiguous for these labels")));
        }
        values[masks[0] as usize] = *v;
    }
    if let Some(mask) = values.iter().position(|v| v.is_nan()) {
        return Err(CliError::config(
            "INVALID_CAPACITY",
            format!("capacity value for `{}` is missing", space.subset_key(mask as u32)),
        ));
    }
    Ok(Capacity::new(n, values)?)
}

pub fn spec(dto: &SpecDto, space: &ShockSpace) -> CliResult<CeSpec> {
    let n = space.len();
    let spec = match dto {
        SpecDto::Expectation { prior: p } => CeSpec::expectation(prior(p, n)?),
        SpecDto::Maxmin { priors: l } => CeSpec::maxmin(priors(l, n)?)?,
        SpecDto::Variational { priors: l, costs } => CeSpec::variational(VariationalTable::new(priors(l, n)?, costs.clone())?),
        SpecDto::VariationalEntropicGrid { theta, reference, mesh } => {
            CeSpec::variational_from_entropic(*theta, &prior(reference, n)?, *mesh)?
        }
        SpecDto::Entropic { theta, reference } => CeSpec::entropic(*theta, prior(reference, n)?)?,
        SpecDto::Choquet { capacity: c } => CeSpec::choquet(capacity(space, c)?),
        SpecDto::RankDependent { prior: p, distortion: g } => CeSpec::rank_dependent(prior(p, n)?, distortion(g))?,
        SpecDto::Smooth { support, weights: w, phi: f } => CeSpec::smooth(priors(support, n)?, weights(w)?, phi(f)?)?,
    };
    Ok(spec)
}

/// Spec kind as written in configurations.
pub fn spec_kind(dto: &SpecDto) -> &'static str {
    match dto {
        SpecDto::Expectation { .. } => "expectation",
        SpecDto::Maxmin { .. } => "maxmin",
        SpecDto::Variational { .. } => "variational",
        SpecDto::VariationalEntropicGrid { .. } => "variational_entropic_grid",
        SpecDto::Entropic { .. } => "entropic",
        SpecDto::Choquet { .. } => "choquet",
        SpecDto::RankDependent { .. } => "rank_dependent",
        SpecDto::Smooth { .. } => "smooth",
    }
}

pub fn i_plus_one(config: &RunConfig, ctx: &Context) -> CliResult<CeSpec> {
    let dto = config
        .i_plus_one
        .as_ref()
        .ok_or_else(|| CliError::config("MISSING_SPEC", "this command needs `i_plus_one`"))?;
    spec(dto, &ctx.space)
}

pub fn seed(choice: SeedChoice, i_plus_one: &CeSpec) -> Seed {
    match choice {
        SeedChoice::UniformExpectation => Seed::UniformExpectation,
        SeedChoice::IPlusOne => Seed::Spec(i_plus_one.clone()),
        SeedChoice::Worst => Seed::Worst,
        SeedChoice::Best => Seed::Best,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// Lifetime utilities on the leaves.
    Leaves,
    /// Per-period utilities on every node.
    Plan,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    depth: usize,
    #[serde(default)]
    leaves: Option<Vec<f64>>,
    #[serde(default)]
    nodes: Option<Vec<f64>>,
}

/// Resolves an inline or file tree. Node values are listed level by level,
/// each level in lexicographic path order.
pub fn tree(r: &TreeRef, kind: TreeKind, ctx: &Context) -> CliResult<AdaptedTree> {
    let (depth, leaves, nodes) = match &r.file {
        Some(file) => {
            if r.depth.is_some() || r.leaves.is_some() || r.nodes.is_some() {
                return Err(CliError::config("MALFORMED_TREE", "a tree given by `file` takes no inline fields"));
            }
            let path = ctx.base_dir.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::config("MISSING_FILE", format!("cannot read tree file {}: {e}", path.display())))?;
            let t: TreeFile = serde_json::from_str(&text).map_err(|e| from_json(e, &path.display().to_string()))?;
            (t.depth, t.leaves, t.nodes)
        }
        None => {
            let depth = r.depth.ok_or_else(|| CliError::config("MALFORMED_TREE", "inline tree needs `depth`"))?;
            (depth, r.leaves.clone(), r.nodes.clone())
        }
    };
    let n = ctx.states();
    match (kind, leaves, nodes) {
        (TreeKind::Leaves, Some(v), None) => Ok(AdaptedTree::leaves_with_cap(n, depth, v, ctx.max_leaves)?),
        (TreeKind::Plan, None, Some(v)) => Ok(AdaptedTree::plan_with_cap(n, depth, v, &ctx.scale, ctx.max_leaves)?),
        (TreeKind::Leaves, _, _) => Err(CliError::config("MALFORMED_TREE", "a lifetime-utility tree needs `leaves` only")),
        (TreeKind::Plan, _, _) => Err(CliError::config("MALFORMED_TREE", "a plan needs `nodes` only")),
    }
}

pub fn second_order(dto: &SecondOrderDto, n: usize) -> CliResult<SecondOrderPrior> {
    match dto {
        SecondOrderDto::Explicit { support, weights: w } => Ok(SecondOrderPrior::from_priors(&priors(support, n)?, &weights(w)?)?),
        SecondOrderDto::Dirac { prior: p } => Ok(SecondOrderPrior::dirac_paths(&prior(p, n)?, 1)),
    }
}

pub fn mu0(dto: &Mu0Dto, mu_plus_one: &SecondOrderPrior, depth: usize, n: usize) -> CliResult<SecondOrderPrior> {
    match dto {
        Mu0Dto::ProductForm => Ok(product_form_prior(mu_plus_one, depth)?),
        Mu0Dto::Explicit { support, weights: w } => {
            let measures = support
                .iter()
                .map(|m| TruncatedMeasure::new(n, depth, m.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SecondOrderPrior::new(measures, w.clone())?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(labels: &[&str]) -> ShockSpace {
        ShockSpace::new(labels.iter().copied()).unwrap()
    }

    #[test]
    fn capacity_keys_follow_state_order() {
        let s = space(&["a", "b", "c"]);
        let table: BTreeMap<String, f64> =
            [("a", 0.2), ("b", 0.2), ("c", 0.2), ("ab", 0.5), ("ac", 0.5), ("bc", 0.5)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let cap = capacity(&s, &table).unwrap();
        assert_eq!(cap.value(0b011), 0.5);
        assert_eq!(cap.value(0b111), 1.0);
        assert_eq!(cap.value(0), 0.0);
    }

    #[test]
    fn capacity_rejects_missing_unknown_and_ambiguous_keys() {
        let s = space(&["a", "b", "c"]);
        let missing: BTreeMap<String, f64> = [("a".to_string(), 0.2)].into_iter().collect();
        assert_eq!(capacity(&s, &missing).unwrap_err().code(), "INVALID_CAPACITY");
        let unknown: BTreeMap<String, f64> = [("z".to_string(), 0.2)].into_iter().collect();
        assert_eq!(capacity(&s, &unknown).unwrap_err().code(), "INVALID_CAPACITY");
        let s = space(&["a", "b", "ab"]);
        let ambiguous: BTreeMap<String, f64> = [("ab".to_string(), 0.2)].into_iter().collect();
        assert_eq!(capacity(&s, &ambiguous).unwrap_err().code(), "INVALID_CAPACITY");
    }

    #[test]
    fn spec_arity_must_match_states() {
        let s = space(&["a", "b"]);
        let dto = SpecDto::Expectation { prior: vec![0.2, 0.3, 0.5] };
        assert_eq!(spec(&dto, &s).unwrap_err().code(), "ARITY_MISMATCH");
    }
}
