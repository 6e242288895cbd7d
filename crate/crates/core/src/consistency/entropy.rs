//! Relative-entropy projection of a second-order prior onto a barycenter
//! constraint: `min R(nu || mu)` subject to `sum_i nu_i p_i = P`.
//!
//! The minimizer has the exponential-family form `nu_i ~ mu_i exp(lambda . p_i)`;
//! `lambda` maximizes the concave dual
//! `g(lambda) = lambda . P - log sum_i mu_i exp(lambda . p_i)`, solved here
//! by damped Newton. The last coordinate is dropped because every `p_i` and
//! `P` sum to one. When `P` sits on a face of the convex hull the dual
//! optimum is at infinity; the support points off that face are detected by
//! their vanishing weight and removed, and the reduced problem is solved
//! again.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::math::{exp, ln, relative_entropy};

/// Dual gradient norm at which Newton stops.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Largest barycenter error of a reported feasible solution.
pub const FEASIBILITY_TOL: f64 = 1e-8;

const MAX_NEWTON: usize = 200;
const DROP_RATIO: f64 = 1e-12;
const FACE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub feasible: bool,
    /// Optimal second-order weights (zeros when infeasible).
    pub nu: Vec<f64>,
    /// Dual variable in the reduced coordinates.
    pub lambda: Vec<f64>,
    /// `R(nu || mu)`, or `+inf` when infeasible.
    pub value: f64,
    pub gradient_norm: f64,
    /// `max_j |sum_i nu_i p_i(j) - P(j)|`.
    pub barycenter_error: f64,
    pub iterations: usize,
}

pub fn entropy_projection(support: &[Vec<f64>], mu: &[f64], target: &[f64]) -> Result<Projection> {
    let k = support.len();
    if k == 0 || mu.len() != k {
        return Err(Error::ArityMismatch { expected: k, found: mu.len() });
    }
    let d = target.len();
    if d < 2 || support.iter().any(|p| p.len() != d) {
        return Err(Error::param("support", "support points and target need one common dimension >= 2"));
    }
    if mu.iter().any(|w| !w.is_finite() || *w < 0.0) || (mu.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPrior("second-order weights must be a probability vector".into()));
    }

    let mut active: Vec<usize> = (0..k).filter(|&i| mu[i] > 0.0).collect();
    let mut iterations = 0;
    loop {
        let sol = newton(support, mu, target, &active);
        iterations += sol.iterations;
        if sol.converged {
            let mut best = finish(support, mu, target, &active, sol, iterations);
            // points of vanishing weight indicate a boundary target; retry
            // on the face spanned by the others
            let top = best.nu.iter().copied().fold(0.0, f64::max);
            let face: Vec<usize> = active.iter().copied().filter(|&i| best.nu[i] > FACE_RATIO * top).collect();
            if face.len() < active.len() {
                let reduced = newton(support, mu, target, &face);
                iterations += reduced.iterations;
                if reduced.converged {
                    let cand = finish(support, mu, target, &face, reduced, iterations);
                    if cand.barycenter_error <= best.barycenter_error && (cand.value - best.value).abs() <= 1e-7 {
                        best = cand;
                    }
                }
            }
            best.iterations = iterations;
            if best.barycenter_error > FEASIBILITY_TOL {
                return Ok(infeasible(k, d, iterations));
            }
            return Ok(best);
        }
        let top = sol.nu.iter().copied().fold(0.0, f64::max);
        let kept: Vec<usize> = active.iter().copied().filter(|&i| sol.nu[i] >= DROP_RATIO * top).collect();
        if kept.len() == active.len() || kept.is_empty() {
            return Ok(infeasible(k, d, iterations));
        }
        active = kept;
    }
}

struct Newton {
    lambda: Vec<f64>,
    nu: Vec<f64>,
    gradient_norm: f64,
    converged: bool,
    iterations: usize,
}

/// Tilted weights `nu` (over the full support) and dual value at `lambda`.
fn tilt(support: &[Vec<f64>], mu: &[f64], target: &[f64], active: &[usize], lambda: &[f64]) -> (Vec<f64>, f64) {
    let r = lambda.len();
    let logits: Vec<f64> =
        active.iter().map(|&i| ln(mu[i]) + (0..r).map(|j| lambda[j] * support[i][j]).sum::<f64>()).collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logits.iter().map(|a| exp(a - top)).sum();
    let mut nu = alloc::vec![0.0; support.len()];
    for (&i, a) in active.iter().zip(&logits) {
        nu[i] = exp(a - top) / z;
    }
    let dual = (0..r).map(|j| lambda[j] * target[j]).sum::<f64>() - (top + ln(z));
    (nu, dual)
}

fn gradient(support: &[Vec<f64>], target: &[f64], active: &[usize], nu: &[f64], r: usize) -> Vec<f64> {
    (0..r).map(|j| target[j] - active.iter().map(|&i| nu[i] * support[i][j]).sum::<f64>()).collect()
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn newton(support: &[Vec<f64>], mu: &[f64], target: &[f64], active: &[usize]) -> Newton {
    let r = target.len() - 1;
    let mut lambda = alloc::vec![0.0; r];
    let (mut nu, mut dual) = tilt(support, mu, target, active, &lambda);
    let mut grad = gradient(support, target, active, &nu, r);
    for it in 0..MAX_NEWTON {
        let gn = norm(&grad);
        if gn <= GRADIENT_TOL {
            return Newton { lambda, nu, gradient_norm: gn, converged: true, iterations: it };
        }
        let mean: Vec<f64> = (0..r).map(|j| active.iter().map(|&i| nu[i] * support[i][j]).sum()).collect();
        let mut cov = alloc::vec![0.0; r * r];
        for &i in active {
            for a in 0..r {
                let da = support[i][a] - mean[a];
                for b in 0..r {
                    cov[a * r + b] += nu[i] * da * (support[i][b] - mean[b]);
                }
            }
        }
        let trace: f64 = (0..r).map(|a| cov[a * r + a]).sum();
        let Some(step) = solve_spd(&cov, &grad, 1e-14 * (1.0 + trace)) else {
            break;
        };
        let slope: f64 = step.iter().zip(&grad).map(|(s, g)| s * g).sum();
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l + t * s).collect();
            if trial.iter().any(|x| !x.is_finite()) {
                t *= 0.5;
                continue;
            }
            let (trial_nu, trial_dual) = tilt(support, mu, target, active, &trial);
            let trial_grad = gradient(support, target, active, &trial_nu, r);
            // close to the optimum the dual gain drops below rounding; a
            // smaller gradient is then the better acceptance signal
            let ascent = trial_dual.is_finite() && trial_dual >= dual + 1e-4 * t * slope;
            let flat = (trial_dual - dual).abs() <= 1e-12 * (1.0 + dual.abs());
            if ascent || (flat && norm(&trial_grad) < 0.5 * gn) {
                lambda = trial;
                nu = trial_nu;
                dual = trial_dual;
                grad = trial_grad;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let gn = norm(&grad);
    Newton { lambda, nu, gradient_norm: gn, converged: gn <= GRADIENT_TOL, iterations: MAX_NEWTON }
}

fn finish(support: &[Vec<f64>], mu: &[f64], target: &[f64], active: &[usize], sol: Newton, iterations: usize) -> Projection {
    let d = target.len();
    let barycenter_error = (0..d)
        .map(|j| (active.iter().map(|&i| sol.nu[i] * support[i][j]).sum::<f64>() - target[j]).abs())
        .fold(0.0, f64::max);
    Projection {
        feasible: true,
        value: relative_entropy(&sol.nu, mu),
        nu: sol.nu,
        lambda: sol.lambda,
        gradient_norm: sol.gradient_norm,
        barycenter_error,
        iterations,
    }
}

fn infeasible(k: usize, d: usize, iterations: usize) -> Projection {
    Projection {
        feasible: false,
        nu: alloc::vec![0.0; k],
        lambda: alloc::vec![0.0; d - 1],
        value: f64::INFINITY,
        gradient_norm: f64::INFINITY,
        barycenter_error: f64::INFINITY,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn barycenter_target_has_zero_cost() {
        let supp = vec![vec![0.3, 0.7], vec![0.7, 0.3]];
        let p = entropy_projection(&supp, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(p.feasible);
        assert!(p.value.abs() < 1e-14);
        assert!((p.nu[0] - 0.5).abs() < 1e-12);

        let supp = vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2], vec![0.1, 0.8, 0.1]];
        let mu = [0.2, 0.5, 0.3];
        let bary: Vec<f64> = (0..3).map(|j| (0..3).map(|i| mu[i] * supp[i][j]).sum()).collect();
        let p = entropy_projection(&supp, &mu, &bary).unwrap();
        assert!(p.value < 1e-14 && p.gradient_norm <= GRADIENT_TOL);
    }

    #[test]
    fn vertex_target_forces_point_mass() {
        let supp = vec![vec![0.3, 0.7], vec![0.7, 0.3]];
        let p = entropy_projection(&supp, &[0.5, 0.5], &[0.3, 0.7]).unwrap();
        assert!(p.feasible);
        assert!((p.value - core::f64::consts::LN_2).abs() < 1e-9, "{}", p.value);
        assert!(p.nu[1] < 1e-9);
        let p = entropy_projection(&supp, &[0.25, 0.75], &[0.3, 0.7]).unwrap();
        assert!((p.value + libm::log(0.25)).abs() < 1e-9);
    }

    #[test]
    fn interior_target_meets_tolerances() {
        let supp = vec![vec![0.1, 0.9], vec![0.5, 0.5], vec![0.8, 0.2]];
        let mu = [0.3, 0.3, 0.4];
        let p = entropy_projection(&supp, &mu, &[0.6, 0.4]).unwrap();
        assert!(p.feasible && p.gradient_norm <= GRADIENT_TOL && p.barycenter_error <= FEASIBILITY_TOL);
        assert!(p.value > 0.0);
        assert!((p.nu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outside_hull_is_infeasible() {
        let supp = vec![vec![0.3, 0.7], vec![0.7, 0.3]];
        let p = entropy_projection(&supp, &[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert!(!p.feasible);
        assert_eq!(p.value, f64::INFINITY);
    }
}
