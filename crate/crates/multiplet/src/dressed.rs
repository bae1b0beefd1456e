//! Dressed-state view of the closed forms.
//!
//! `G(∞) ∝ N(Δ) / D(Δ)` with `D = P - i(Γ/2) N` monic and `deg N = deg D - 1`,
//! so the amplitude splits into simple poles at the dressed eigenvalues `ξᵢ`
//! (the roots of `D`, equal to the eigenvalues of `-iA`):
//!
//! ```text
//! N/D = Σᵢ rᵢ / (Δ - ξᵢ),   rᵢ = N(ξᵢ) / D'(ξᵢ)
//! ```

use num_complex::Complex64;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::poly;

pub const ROOT_ITERATIONS: usize = 200;
pub const ROOT_TOLERANCE: f64 = 1e-12;
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Characteristic polynomial `D(Δ)`, ascending complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<Complex64>,
}

impl CharPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(
            coeffs.last().is_some_and(|c| c.norm() > 0.0),
            "leading coefficient must be nonzero"
        );
        CharPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly::eval(&self.coeffs, z)
    }
}

pub fn char_poly(form: &ClosedForm) -> CharPoly {
    let ratio = form.ratio();
    let p = ratio.real_part.dense();
    let n = ratio.numerator.dense();
    let half = ratio.gamma / 2.0;
    let coeffs = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| Complex64::new(pk, -half * n.get(k).copied().unwrap_or(0.0)))
        .collect();
    CharPoly::new(coeffs)
}

/// All roots, ordered by real part then imaginary part.
pub fn find_roots(poly: &CharPoly) -> Result<Vec<Complex64>> {
    let mut roots = poly::aberth(&poly.coeffs, ROOT_ITERATIONS, ROOT_TOLERANCE)?;
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn check_distinct(roots: &[Complex64]) -> Result<()> {
    check_separated(roots, &vec![0.0; roots.len()])
}

fn check_separated(roots: &[Complex64], radius: &[f64]) -> Result<()> {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= DEGENERACY_THRESHOLD.max(radius[i] + radius[j]) {
                return Err(Error::DegenerateRoots(i, j));
            }
        }
    }
    Ok(())
}

/// Weierstrass inclusion radii `n |D(ξᵢ)| / |aₙ ∏ⱼ (ξᵢ - ξⱼ)|`: each disk
/// holds a true root. A multiple root comes back as a cluster whose disks
/// overlap even though the computed points sit well apart.
fn inclusion_radii(poly: &CharPoly, roots: &[Complex64]) -> Vec<f64> {
    let n = roots.len() as f64;
    let lead = poly.coeffs.last().unwrap().norm();
    roots
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let spread: f64 = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (xi - xj).norm())
                .product();
            n * poly.eval(xi).norm() / (lead * spread)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedDecomposition {
    pub roots: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub g: f64,
}

impl DressedDecomposition {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// Complex amplitude `Σ rᵢ/(Δ - ξᵢ)`, each term separately.
    pub fn terms(&self, delta: f64) -> Vec<Complex64> {
        let d = Complex64::new(delta, 0.0);
        self.roots
            .iter()
            .zip(&self.residues)
            .map(|(&xi, &r)| r / (d - xi))
            .collect()
    }
}

pub fn residues_numeric(form: &ClosedForm) -> Result<DressedDecomposition> {
    let d = char_poly(form);
    let roots = find_roots(&d)?;
    check_separated(&roots, &inclusion_radii(&d, &roots))?;
    let ratio = form.ratio();
    let n: Vec<Complex64> = ratio
        .numerator
        .dense()
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    let dd = poly::derivative(d.coeffs());
    let residues = roots
        .iter()
        .map(|&xi| poly::eval(&n, xi) / poly::eval(&dd, xi))
        .collect();
    Ok(DressedDecomposition {
        roots,
        residues,
        g: ratio.g,
    })
}

pub fn spectrum_decomposed(decomp: &DressedDecomposition, delta: f64) -> f64 {
    let amp: Complex64 = decomp.terms(delta).into_iter().sum();
    decomp.g * decomp.g * amp.norm_sqr()
}

/// Expansion of `g²|Σᵢ aᵢ|²` into the absolute-squared terms `g²|aᵢ|²` and the
/// ordered cross terms `g² aᵢ conj(aⱼ)`, `i ≠ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTerms {
    pub absolute: Vec<f64>,
    pub cross: Vec<((usize, usize), Complex64)>,
}

impl InterferenceTerms {
    pub fn total(&self) -> f64 {
        self.absolute.iter().sum::<f64>() + self.cross.iter().map(|(_, c)| c.re).sum::<f64>()
    }
}

pub fn interference_terms(decomp: &DressedDecomposition, delta: f64) -> InterferenceTerms {
    let g2 = decomp.g * decomp.g;
    let a = decomp.terms(delta);
    let absolute = a.iter().map(|t| g2 * t.norm_sqr()).collect();
    let mut cross = Vec::new();
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                cross.push(((i, j), a[i] * a[j].conj() * g2));
            }
        }
    }
    InterferenceTerms { absolute, cross }
}

/// The appendix residue factors: Ϝ with ζᵢ for four roots, Λ with κᵢ for five.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixFactors {
    pub scale: Complex64,
    pub per_root: Vec<Complex64>,
}

pub fn appendix_factors(roots: &[Complex64]) -> Result<AppendixFactors> {
    check_distinct(roots)?;
    match roots.len() {
        4 => Ok(quartuplet_factors(roots)),
        5 => Ok(quintuplet_factors(roots)),
        n => Err(Error::UnsupportedTopology(format!(
            "appendix factors exist for four or five roots, got {n}"
        ))),
    }
}

fn quartuplet_factors(r: &[Complex64]) -> AppendixFactors {
    let (x1, x2, x3, x4) = (r[0], r[1], r[2], r[3]);
    let one = Complex64::new(1.0, 0.0);
    let cube = |z: Complex64| z * z * z;
    // as printed, including the ξ₁(1 + ξ₄) bracket
    let digamma = cube(x1) * (x3 - x4) * (x2 * x2 + x3 * x4 - 2.0 * x2 * x4)
        + cube(x2) * ((x4 - x3) * (x1 * x1 + x3 * x4) - x1 * (x4 * x4 - x3 * x3))
        + cube(x3) * (x4 - x1) * (x1 * x4 - x2 * (x4 - x2))
        + cube(x4) * ((x3 - x1) * (x1 * x1 - x1 * x2 - x2 * x2) + x2 * (x4 * x4 - x1 * x1))
        + x1 * x2 * x3 * x4 * (x1 * (one + x4) - 2.0 * x3 * x4);
    let zeta = |a: Complex64, b: Complex64, c: Complex64| (a * a + b * c) * (c - b) - a * (c * c - b * b);
    AppendixFactors {
        scale: digamma,
        per_root: vec![zeta(x2, x3, x4), zeta(x3, x4, x1), zeta(x4, x1, x2), zeta(x1, x2, x3)],
    }
}

fn quintuplet_factors(r: &[Complex64]) -> AppendixFactors {
    let pairwise = |skip: Option<usize>| {
        let mut acc = Complex64::new(1.0, 0.0);
        for i in 0..5 {
            for j in i + 1..5 {
                if Some(i) != skip && Some(j) != skip {
                    acc *= r[i] - r[j];
                }
            }
        }
        acc
    };
    AppendixFactors {
        scale: pairwise(None),
        per_root: (0..5).map(|i| pairwise(Some(i))).collect(),
    }
}

/// `rᵢ / (N(ξᵢ) · factorᵢ / scale)` for each root. A faithful appendix form
/// makes these all equal.
pub fn appendix_ratios(form: &ClosedForm, decomp: &DressedDecomposition) -> Result<Vec<Complex64>> {
    let factors = appendix_factors(&decomp.roots)?;
    let n: Vec<Complex64> = form
        .ratio()
        .numerator
        .dense()
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    Ok(decomp
        .roots
        .iter()
        .zip(&decomp.residues)
        .zip(&factors.per_root)
        .map(|((&xi, &r), &f)| r / (poly::eval(&n, xi) * f / factors.scale))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_factors_on_integer_roots() {
        let roots: Vec<_> = (1..=5).map(|k| c(k as f64)).collect();
        let f = appendix_factors(&roots).unwrap();
        assert_eq!(f.scale, c(288.0));
        // six negative differences
        assert_eq!(f.per_root[0], c(12.0));
    }

    #[test]
    fn coincident_roots_rejected() {
        let roots = vec![c(1.0), c(1.0), c(2.0), c(3.0), c(4.0)];
        assert_eq!(appendix_factors(&roots), Err(Error::DegenerateRoots(0, 1)));
    }

    #[test]
    fn single_pole_lorentzian() {
        let d = DressedDecomposition {
            roots: vec![Complex64::new(0.0, 0.5)],
            residues: vec![c(1.0)],
            g: 1.0,
        };
        assert!((spectrum_decomposed(&d, 0.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn four_linear_factors() {
        // (Δ-1)(Δ-2)(Δ-3)(Δ-4)
        let p = CharPoly::from_real(&[24.0, -50.0, 35.0, -10.0, 1.0]);
        let roots = find_roots(&p).unwrap();
        for (k, r) in roots.iter().enumerate() {
            assert!((r - c(k as f64 + 1.0)).norm() < 1e-12, "{r}");
        }
    }
}
