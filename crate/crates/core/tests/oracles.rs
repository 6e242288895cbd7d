//! Solver and checker outputs against independent brute-force oracles.

use grect_core::cequiv::{entropic, CeSpec, CertaintyEquivalent, Distortion};
use grect_core::consistency::{hull_minimum, rectangular_hull_vertices, TruncatedMeasure};
use grect_core::lln::{choquet_bounds_from_priors, SelectionRule};
use grect_core::rng;
use grect_core::solver::{nested_levels, solve_nested, solve_value_iteration_from, Seed, SolveConfig};
use grect_core::tree::lifetime_utility;
use grect_core::{AdaptedTree, Capacity, DiscountedUtilityScale, Prior};

/// Probability of a path under the IID product of `prior`, enumerated from
/// its base-n digits.
fn path_probability(prior: &Prior, mut index: usize, depth: usize) -> f64 {
    let n = prior.len();
    let mut p = 1.0;
    for _ in 0..depth {
        p *= prior.weights()[index % n];
        index /= n;
    }
    p
}

fn random_tree(r: &mut rng::Rng, n: usize, depth: usize) -> AdaptedTree {
    let leaves = n.pow(depth as u32);
    AdaptedTree::leaves(n, depth, (0..leaves).map(|_| rng::uniform(r, -1.0, 1.0)).collect()).unwrap()
}

fn random_prior(r: &mut rng::Rng, n: usize) -> Prior {
    Prior::new(rng::simplex_point(r, n)).unwrap()
}

#[test]
fn nested_expectation_is_product_expectation() {
    let mut r = rng::seeded(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = 2 + rng::index(&mut r, 3);
        let depth = rng::index(&mut r, 4);
        let prior = random_prior(&mut r, n);
        let beta = rng::uniform(&mut r, 0.05, 0.95);
        let xi = random_tree(&mut r, n, depth);
        let cfg = SolveConfig::new(CeSpec::expectation(prior.clone()), DiscountedUtilityScale::new(beta).unwrap());
        let brute: f64 =
            xi.values().iter().enumerate().map(|(i, x)| path_probability(&prior, i, depth) * x).sum();
        worst = worst.max((solve_nested(&cfg, &xi).unwrap() - brute).abs());
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn nested_maxmin_is_hull_minimum() {
    let mut r = rng::seeded(5);
    for _ in 0..100 {
        let n = 2 + rng::index(&mut r, 2);
        let vertices: Vec<Prior> = (0..2).map(|_| random_prior(&mut r, n)).collect();
        let cfg = SolveConfig::new(CeSpec::maxmin(vertices.clone()).unwrap(), DiscountedUtilityScale::new(0.7).unwrap());
        let xi = random_tree(&mut r, n, 2);
        let hull = hull_minimum(&vertices, &xi).unwrap();
        assert!((solve_nested(&cfg, &xi).unwrap() - hull).abs() <= 1e-10);
    }
}

#[test]
fn hull_vertices_are_distinct_products() {
    let l = vec![Prior::new(vec![0.4, 0.6]).unwrap(), Prior::new(vec![0.6, 0.4]).unwrap()];
    let v = rectangular_hull_vertices(&l, 2).unwrap();
    assert_eq!(v.len(), 8);
    for (i, a) in v.iter().enumerate() {
        assert!((a.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(v[i + 1..].iter().all(|b| b != a));
    }
    let l3 = vec![Prior::uniform(3), Prior::dirac(3, 0)];
    assert_eq!(rectangular_hull_vertices(&l3, 2).unwrap().len(), 16);
}

#[test]
fn entropic_tower_matches_closed_form() {
    let mut r = rng::seeded(17);
    for _ in 0..100 {
        let theta = rng::uniform(&mut r, 0.1, 4.0);
        let beta = rng::uniform(&mut r, 0.1, 0.95);
        let l = random_prior(&mut r, 2);
        let cfg = SolveConfig::new(CeSpec::entropic(theta * beta, l.clone()).unwrap(), DiscountedUtilityScale::new(beta).unwrap());
        let xi = random_tree(&mut r, 2, 2);
        let product = TruncatedMeasure::iid(&l, 2);
        let closed = entropic(theta, &Prior::new(product.weights().to_vec()).unwrap(), xi.values());
        assert!((solve_nested(&cfg, &xi).unwrap() - closed).abs() <= 1e-10);
    }
}

#[test]
fn value_iteration_agrees_with_nested_on_subplans() {
    // every sub-plan's value must match the nested value of its own
    // lifetime utility, not just the root
    let scale = DiscountedUtilityScale::new(0.8).unwrap();
    let cap = Capacity::new(2, vec![0.0, 0.45, 0.1, 1.0]).unwrap();
    let cfg = SolveConfig::new(CeSpec::choquet(cap), scale).with_tol(1e-13);
    let mut r = rng::seeded(99);
    let bound = scale.period_bound();
    let plan = AdaptedTree::plan(2, 2, (0..7).map(|_| rng::uniform(&mut r, -bound, bound)).collect(), &scale).unwrap();
    let subplans = [plan.clone(), plan.continuation(0), plan.continuation(1)];
    let report = solve_value_iteration_from(&cfg, &subplans, &Seed::Worst).unwrap();
    assert!(report.converged);
    for (p, v) in subplans.iter().zip(&report.values) {
        let nested = solve_nested(&cfg, &lifetime_utility(p, &scale).unwrap()).unwrap();
        assert!((nested - v).abs() <= 1e-10, "{nested} vs {v}");
    }
}

#[test]
fn entropic_cross_check_gap_is_the_scaling_gap() {
    // V* discounts the inner certainty equivalent outside it, nested
    // evaluation of lifetime utility inside it; the two differ unless
    // the model is positively homogeneous
    let ent = |theta: f64, p: &[f64], x: &[f64]| -(p.iter().zip(x).map(|(p, x)| p * (-theta * x).exp()).sum::<f64>()).ln() / theta;
    let (beta, theta) = (0.8, 1.7);
    let p = [0.35, 0.65];
    let scale = DiscountedUtilityScale::new(beta).unwrap();
    let cfg = SolveConfig::new(CeSpec::entropic(theta, Prior::new(p.to_vec()).unwrap()).unwrap(), scale).with_tol(1e-13);
    let mut r = rng::seeded(17);
    for _ in 0..20 {
        let u: Vec<f64> = (0..7).map(|_| rng::uniform(&mut r, -0.2, 0.2)).collect();
        let plan = AdaptedTree::plan(2, 2, u.clone(), &scale).unwrap();
        let w = |s: usize| [u[3 + 2 * s] / (1.0 - beta), u[4 + 2 * s] / (1.0 - beta)];
        let recursive: Vec<f64> = (0..2).map(|s| u[1 + s] + beta * ent(theta, &p, &w(s))).collect();
        let inside: Vec<f64> = (0..2).map(|s| u[1 + s] + ent(theta, &p, &w(s).map(|x| beta * x))).collect();
        let gap = (beta * (ent(theta, &p, &recursive) - ent(theta, &p, &inside))).abs();
        let measured = grect_core::solver::cross_check(&cfg, &plan).unwrap();
        assert!((measured - gap).abs() <= 1e-10, "{measured} vs {gap}");
    }
}

#[test]
fn nested_levels_satisfy_the_recursion_at_every_node() {
    let beta = 0.6;
    let spec = CeSpec::rank_dependent(Prior::new(vec![0.2, 0.3, 0.5]).unwrap(), Distortion::Prelec { alpha: 0.65 }).unwrap();
    let cfg = SolveConfig::new(spec.clone(), DiscountedUtilityScale::new(beta).unwrap());
    let xi = random_tree(&mut rng::seeded(3), 3, 3);
    let levels = nested_levels(&cfg, &xi).unwrap();
    for t in 0..3 {
        for (j, v) in levels[t].iter().enumerate() {
            let kids: Vec<f64> = levels[t + 1][3 * j..3 * j + 3].iter().map(|x| x / beta).collect();
            assert_eq!(*v, beta * spec.evaluate(&kids).unwrap());
        }
    }
}

#[test]
fn fixed_vertex_means_lie_inside_choquet_bounds() {
    let l = vec![Prior::new(vec![0.2, 0.5, 0.3]).unwrap(), Prior::new(vec![0.6, 0.1, 0.3]).unwrap()];
    let xi = [0.9, -0.3, 0.1];
    let (lo, hi) = choquet_bounds_from_priors(&l, &xi).unwrap();
    for rule in [SelectionRule::FixedVertex(0), SelectionRule::FixedVertex(1), SelectionRule::AdversarialLow, SelectionRule::AdversarialHigh] {
        let m = rule.exact_mean(&l, &xi).unwrap();
        assert!(lo - 1e-15 <= m && m <= hi + 1e-15, "{rule:?}: {m} not in [{lo}, {hi}]");
    }
}
