//! Smooth ambiguity: `phi^-1( sum_i mu_i phi(E_{p_i}[xi]) )`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, ln, min_max, powf};
use crate::space::Prior;
use crate::DOMAIN_SLACK;

/// Shift used by the power transform when none is given: maps the working
/// domain `[-3, 3]` onto `[0, 6]`.
pub const DEFAULT_POWER_SHIFT: f64 = 1.0 + DOMAIN_SLACK;

/// Strictly increasing second-order transform.
#[derive(Clone)]
pub enum Phi {
    Linear,
    /// `-exp(-theta x)`; `theta = 0` is read as linear.
    Exponential { theta: f64 },
    /// `(x + shift)^rho`, defined for `x >= -shift`.
    Power { rho: f64, shift: f64 },
    /// User-supplied strictly increasing function. The inverse is computed
    /// by bisection unless given.
    Custom(CustomPhi),
}

#[derive(Clone)]
pub struct CustomPhi {
    pub forward: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Linear => write!(f, "Linear"),
            Phi::Exponential { theta } => write!(f, "Exponential {{ theta: {theta} }}"),
            Phi::Power { rho, shift } => write!(f, "Power {{ rho: {rho}, shift: {shift} }}"),
            Phi::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PartialEq for Phi {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Phi::Linear, Phi::Linear) => true,
            (Phi::Exponential { theta: a }, Phi::Exponential { theta: b }) => a == b,
            (Phi::Power { rho: a, shift: s }, Phi::Power { rho: b, shift: t }) => a == b && s == t,
            (Phi::Custom(a), Phi::Custom(b)) => Arc::ptr_eq(&a.forward, &b.forward),
            _ => false,
        }
    }
}

impl Phi {
    pub fn power(rho: f64) -> Self {
        Phi::Power { rho, shift: DEFAULT_POWER_SHIFT }
    }

    pub fn custom(forward: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Phi::Custom(CustomPhi { forward: Arc::new(forward), inverse: None })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Phi::Linear | Phi::Custom(_) => Ok(()),
            Phi::Exponential { theta } if theta.is_finite() && theta >= 0.0 => Ok(()),
            Phi::Exponential { .. } => Err(Error::param("theta", "exponential phi needs theta >= 0")),
            Phi::Power { rho, shift } => {
                if !(rho > 0.0 && rho < 1.0) {
                    return Err(Error::param("rho", "power phi needs rho in (0, 1)"));
                }
                if !(shift.is_finite() && shift > 0.0) {
                    return Err(Error::param("shift", "power phi needs a positive shift"));
                }
                Ok(())
            }
        }
    }

    /// Linear and exponential transforms give translation-invariant smooth
    /// functionals; nothing is claimed for the others.
    pub fn is_exponential_family(&self) -> bool {
        matches!(self, Phi::Linear | Phi::Exponential { .. })
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Phi::Linear => x,
            Phi::Exponential { theta } if *theta == 0.0 => x,
            Phi::Exponential { theta } => -exp(-theta * x),
            Phi::Power { rho, shift } => {
                let y = x + shift;
                if y < 0.0 {
                    return Err(Error::OutOfRange { what: "power phi argument", value: x, lo: -shift, hi: f64::INFINITY });
                }
                powf(y, *rho)
            }
            Phi::Custom(c) => (c.forward)(x),
        })
    }

    /// Inverse of `phi` at `y`, knowing the preimage lies in `[lo, hi]`.
    pub fn inverse(&self, y: f64, lo: f64, hi: f64) -> f64 {
        let raw = match self {
            Phi::Linear => y,
            Phi::Exponential { theta } if *theta == 0.0 => y,
            Phi::Exponential { theta } => -ln(-y) / theta,
            Phi::Power { rho, shift } => powf(y.max(0.0), 1.0 / rho) - shift,
            Phi::Custom(c) => match &c.inverse {
                Some(inv) => inv(y),
                None => bisect(&*c.forward, y, lo, hi),
            },
        };
        // the certainty equivalent lies between the extreme arguments
        raw.clamp(lo, hi)
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, y: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Evaluates the smooth functional for a finite second-order prior.
pub fn smooth(support: &[Prior], weights: &Prior, phi: &Phi, xi: &[f64]) -> Result<f64> {
    let firsts: Vec<(f64, f64)> = support
        .iter()
        .zip(weights.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, &w)| (w, p.expectation(xi)))
        .collect();
    let values: Vec<f64> = firsts.iter().map(|(_, e)| *e).collect();
    let (lo, hi) = min_max(&values);
    if lo == hi {
        return Ok(lo);
    }
    match phi {
        Phi::Linear => Ok(firsts.iter().map(|(w, e)| w * e).sum()),
        Phi::Exponential { theta } if *theta == 0.0 => Ok(firsts.iter().map(|(w, e)| w * e).sum()),
        Phi::Exponential { theta } => {
            // log-sum-exp shifted at the smallest expectation
            let s: f64 = firsts.iter().map(|(w, e)| w * exp(-theta * (e - lo))).sum();
            Ok((lo - ln(s) / theta).clamp(lo, hi))
        }
        _ => {
            let mut acc = 0.0;
            for (w, e) in &firsts {
                acc += w * phi.apply(*e)?;
            }
            Ok(phi.inverse(acc, lo, hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mu2() -> (Vec<Prior>, Prior) {
        (
            vec![Prior::new(vec![0.3, 0.7]).unwrap(), Prior::new(vec![0.7, 0.3]).unwrap()],
            Prior::uniform(2),
        )
    }

    #[test]
    fn point_mass_reduces_to_expectation() {
        let l = Prior::new(vec![0.2, 0.8]).unwrap();
        for phi in [Phi::Linear, Phi::Exponential { theta: 3.0 }, Phi::power(0.5)] {
            let v = smooth(&[l.clone()], &Prior::new(vec![1.0]).unwrap(), &phi, &[1.0, -0.5]).unwrap();
            assert!((v - l.expectation(&[1.0, -0.5])).abs() < 1e-15);
        }
    }

    #[test]
    fn power_phi_hand_value() {
        // E under the two priors: -0.4 and 0.4; sqrt(2.6), sqrt(3.4) averaged, squared, minus 3
        let (supp, w) = mu2();
        let v = smooth(&supp, &w, &Phi::power(0.5), &[-1.0, 1.0]).unwrap();
        let m = 0.5 * (libm::sqrt(2.6) + libm::sqrt(3.4));
        assert!((v - (m * m - 3.0)).abs() < 1e-14);
    }

    #[test]
    fn custom_phi_bisection_matches_closed_form() {
        let (supp, w) = mu2();
        let custom = Phi::custom(|x| -libm::exp(-2.0 * x));
        let a = smooth(&supp, &w, &custom, &[0.9, -0.3]).unwrap();
        let b = smooth(&supp, &w, &Phi::Exponential { theta: 2.0 }, &[0.9, -0.3]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn power_domain() {
        assert!(Phi::power(0.5).apply(-3.5).is_err());
        assert!(Phi::power(1.5).validate().is_err());
        assert!(Phi::Exponential { theta: -1.0 }.validate().is_err());
    }
}
