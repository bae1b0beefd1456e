//! Dense polynomial helpers. Coefficients are stored in ascending degree.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (k, &c) in out.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        out = next;
    }
    out
}

/// Divide by `(x - r)` and drop the remainder.
pub fn deflate_real(coeffs: &[f64], r: f64) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut out = vec![0.0; n - 1];
    let mut carry = 0.0;
    for k in (1..n).rev() {
        carry = coeffs[k] + carry * r;
        out[k - 1] = carry;
    }
    out
}

/// Simultaneous Aberth iteration for all roots of `coeffs`.
///
/// Starts from points on the circle of radius `1 + max|a_k/a_n|` and stops
/// once every residual is below `tol * max|a_k|` (monic scaling) or has hit
/// the rounding floor of the Horner evaluation.
pub fn aberth(coeffs: &[Complex64], max_iter: usize, tol: f64) -> Result<Vec<Complex64>> {
    let lead = *coeffs.last().expect("non-empty polynomial");
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let p: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    let n = p.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let dp = derivative(&p);
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let radius = 1.0 + p[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let abs_coeffs: Vec<f64> = p.iter().map(|c| c.norm()).collect();
    let converged = |z: &[Complex64]| {
        z.iter().all(|&x| {
            let r = eval(&p, x).norm();
            let floor = 8.0 * f64::EPSILON * eval_real(&abs_coeffs, x.norm());
            r <= tol * scale || r <= floor
        })
    };

    let step = |z: &[Complex64], k: usize| {
        let ratio = eval(&p, z[k]) / eval(&dp, z[k]);
        let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
        ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion)
    };

    for _ in 0..max_iter {
        if converged(&z) {
            break;
        }
        for k in 0..n {
            if eval(&p, z[k]).norm() == 0.0 {
                continue;
            }
            let s = step(&z, k);
            if s.is_finite() {
                z[k] -= s;
            }
        }
    }
    if !converged(&z) {
        return Err(Error::NoConvergence(max_iter));
    }
    // a few more steps, kept only while they shrink the residual, take
    // simple roots from the stopping tolerance down to rounding level
    for _ in 0..3 {
        let mut improved = false;
        for k in 0..n {
            let s = step(&z, k);
            let candidate = z[k] - s;
            if s.is_finite() && eval(&p, candidate).norm() < eval(&p, z[k]).norm() {
                z[k] = candidate;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expand_and_evaluate() {
        let p = from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(p, vec![c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(eval(&p, c(3.0, 0.0)), c(2.0, 0.0));
        assert_eq!(derivative(&p), vec![c(-3.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn deflation() {
        // (x-1)(x-2)(x+3) / (x-2) = (x-1)(x+3) = x^2 + 2x - 3
        let p = [6.0, -7.0, 0.0, 1.0];
        assert_eq!(deflate_real(&p, 2.0), vec![-3.0, 2.0, 1.0]);
    }

    #[test]
    fn aberth_handles_multiple_root() {
        // z^3 (z - i/2)
        let p = from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.5)]);
        let roots = aberth(&p, 200, 1e-12).unwrap();
        let near_half = roots.iter().filter(|r| (**r - c(0.0, 0.5)).norm() < 1e-10).count();
        assert_eq!(near_half, 1);
        assert!(roots
            .iter()
            .all(|r| r.norm() < 1e-3 || (*r - c(0.0, 0.5)).norm() < 1e-10));
    }
}
