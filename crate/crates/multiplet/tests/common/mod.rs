//! Reference spectra that do not go through `compile` or the crate's own
//! linear algebra.

#![allow(dead_code)]

use multiplet::model::LinkageGraph;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// `-iH - (Γ/2)|e><e|` over the driven states, built straight from the
/// couplings with nalgebra.
pub fn amplitude_matrix(graph: &LinkageGraph) -> (Vec<String>, DMatrix<Complex64>) {
    let mut labels = vec![graph.excited().to_string()];
    labels.extend(
        graph
            .states()
            .iter()
            .filter(|s| *s != graph.excited() && *s != graph.vacuum())
            .cloned(),
    );
    let idx = |s: &str| labels.iter().position(|l| l == s).unwrap();
    let n = labels.len();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for c in graph.couplings() {
        let (i, j) = (idx(&c.from), idx(&c.to));
        let w = Complex64::from_polar(c.rabi, c.phase);
        h[(i, j)] += w;
        h[(j, i)] += w.conj();
    }
    let mut a = h * Complex64::new(0.0, -1.0);
    a[(0, 0)] -= Complex64::new(graph.gamma() / 2.0, 0.0);
    (labels, a)
}

/// `|<e|(iΔ - A)^{-1}|e>|²` by LU, with `g = 1`. States the initial state
/// never reaches are dropped first, as they would make the system singular
/// without changing the answer.
pub fn resolvent_intensity(graph: &LinkageGraph, delta: f64) -> f64 {
    let (labels, a) = amplitude_matrix(graph);
    let n = labels.len();
    let start = labels.iter().position(|l| l == graph.initial()).unwrap();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && a[(i, j)].norm() > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if !seen[0] {
        return 0.0;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
    let m = DMatrix::from_fn(keep.len(), keep.len(), |r, c| {
        let diag = if r == c {
            Complex64::new(0.0, delta)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag - a[(keep[r], keep[c])]
    });
    let rhs = DVector::from_fn(keep.len(), |r, _| {
        if keep[r] == start {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let x = m.lu().solve(&rhs).expect("nonsingular resolvent");
    x[0].norm_sqr()
}

pub fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
