//! Small numeric helpers shared across modules.

use alloc::vec::Vec;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `base^exp` as a `u128`, saturating on overflow.
pub fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Number of internal nodes of a complete `n`-ary tree of depth `depth`,
/// i.e. `(n^depth - 1) / (n - 1)`.
pub fn internal_nodes(n: usize, depth: usize) -> usize {
    let mut total = 0usize;
    let mut level = 1usize;
    for _ in 0..depth {
        total += level;
        level *= n;
    }
    total
}

/// Relative entropy `R(p || q) = sum p log(p / q)` with `0 log 0 = 0`.
/// Infinite when `p` is not absolutely continuous with respect to `q`.
pub fn relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        acc += pi * ln(pi / qi);
    }
    // clamp rounding noise; R is non-negative
    acc.max(0.0)
}

/// Number of compositions of `m` into `n` non-negative parts,
/// `C(m + n - 1, n - 1)`, saturating.
pub fn simplex_grid_len(m: usize, n: usize) -> u128 {
    let k = (n - 1) as u128;
    let top = (m + n - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(top - i) / (i + 1);
    }
    acc
}

/// All points of the simplex grid of mesh `1/m` in dimension `n`, in
/// reverse-lexicographic order of the integer compositions (first
/// coordinate largest first).
pub fn simplex_grid(m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut parts = alloc::vec![0usize; n];
    fill_compositions(m, 0, &mut parts, &mut |c| {
        out.push(c.iter().map(|&k| k as f64 / m as f64).collect());
    });
    out
}

fn fill_compositions(remaining: usize, idx: usize, parts: &mut [usize], emit: &mut dyn FnMut(&[usize])) {
    let n = parts.len();
    if idx == n - 1 {
        parts[idx] = remaining;
        emit(parts);
        return;
    }
    for k in (0..=remaining).rev() {
        parts[idx] = k;
        fill_compositions(remaining - k, idx + 1, parts, emit);
    }
}

/// Base-`n` digits of `index`, most significant first, padded to `len`.
pub fn digits(mut index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut out = alloc::vec![0usize; len];
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_match_binomials() {
        assert_eq!(simplex_grid(4, 3).len() as u128, simplex_grid_len(4, 3));
        assert_eq!(simplex_grid_len(100, 2), 101);
        assert_eq!(simplex_grid_len(10, 3), 66);
        for p in simplex_grid(7, 4) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_edge_cases() {
        assert_eq!(relative_entropy(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!(relative_entropy(&[0.5, 0.5], &[1.0, 0.0]).is_infinite());
        let r = relative_entropy(&[1.0, 0.0], &[0.5, 0.5]);
        assert!((r - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn digit_expansion() {
        assert_eq!(digits(5, 2, 3), [1, 0, 1]);
        assert_eq!(digits(0, 3, 2), [0, 0]);
        assert_eq!(internal_nodes(2, 2), 3);
        assert_eq!(internal_nodes(3, 0), 0);
    }
}
