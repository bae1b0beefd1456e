//! Closed-form multiplet spectra.
//!
//! Every preset spectrum has the form
//!
//! ```text
//! S(Δ) = g² N(Δ)² / (P(Δ)² + (Γ/2)² N(Δ)²)
//! ```
//!
//! where `P(Δ) = det(Δ - H)` is the characteristic polynomial of the field
//! Hamiltonian over the driven states and `N(Δ)` the same for the ground
//! states alone (the excited-state minor). Both are even or odd in Δ, so they
//! are stored as `Δ^shift · q(Δ²)` and evaluated in `x = Δ²`.

use crate::error::{Error, Result};
use crate::model::Topology;
use crate::poly::{deflate_real, eval_real};

/// `Δ^shift · Σ coeffs[k] (Δ²)^k`
#[derive(Debug, Clone, PartialEq)]
pub struct ParityPoly {
    pub shift: u32,
    pub coeffs: Vec<f64>,
}

impl ParityPoly {
    pub fn new(shift: u32, coeffs: Vec<f64>) -> Self {
        ParityPoly { shift, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.shift as usize + 2 * (self.coeffs.len() - 1)
    }

    pub fn eval(&self, delta: f64) -> f64 {
        delta.powi(self.shift as i32) * eval_real(&self.coeffs, delta * delta)
    }

    /// Ascending coefficients in Δ.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.degree() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[self.shift as usize + 2 * k] = c;
        }
        out
    }

    /// Move exactly vanishing low-order coefficients into the shift.
    fn normalized(&self) -> ParityPoly {
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let zeros = zeros.min(self.coeffs.len() - 1);
        ParityPoly {
            shift: self.shift + 2 * zeros as u32,
            coeffs: self.coeffs[zeros..].to_vec(),
        }
    }
}

/// `S = g² N² / (P² + (Γ/2)² N²)`
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRatio {
    pub numerator: ParityPoly,
    pub real_part: ParityPoly,
    pub gamma: f64,
    pub g: f64,
}

impl SpectralRatio {
    pub fn intensity(&self, delta: f64) -> Result<f64> {
        let n = self.numerator.normalized();
        let p = self.real_part.normalized();
        let common = n.shift.min(p.shift);
        let x = delta * delta;
        let mut nq = n.coeffs;
        let mut pq = p.coeffs;
        let (mut nv, mut pv);
        loop {
            nv = delta.powi((n.shift - common) as i32) * eval_real(&nq, x);
            pv = delta.powi((p.shift - common) as i32) * eval_real(&pq, x);
            // a shared root of N and P away from zero: remove it and take
            // the limit
            if nv == 0.0 && pv == 0.0 && nq.len() > 1 && pq.len() > 1 && x != 0.0 {
                nq = deflate_real(&nq, x);
                pq = deflate_real(&pq, x);
                continue;
            }
            break;
        }
        if nv == 0.0 {
            return Ok(0.0);
        }
        let half = self.gamma / 2.0;
        let denom = pv * pv + half * half * nv * nv;
        let s = self.g * self.g * nv * nv / denom;
        if denom == 0.0 || !s.is_finite() {
            return Err(Error::NonFinite(delta));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartupletParams {
    pub o1: f64,
    pub o2: f64,
    pub m1: f64,
    pub m2: f64,
    pub phase: f64,
    pub gamma: f64,
    pub g: f64,
}

impl QuartupletParams {
    pub fn new(o1: f64, o2: f64, m1: f64, m2: f64) -> Self {
        QuartupletParams {
            o1,
            o2,
            m1,
            m2,
            phase: 0.0,
            gamma: 1.0,
            g: 1.0,
        }
    }

    pub fn uniform(rabi: f64) -> Self {
        Self::new(rabi, rabi, rabi, rabi)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn ratio(&self) -> SpectralRatio {
        let Self {
            o1,
            o2,
            m1,
            m2,
            phase,
            gamma,
            g,
        } = *self;
        let (o1s, o2s, m1s, m2s) = (o1 * o1, o2 * o2, m1 * m1, m2 * m2);
        let k = o1s * m2s + o2s * m1s + 2.0 * o1 * o2 * m1 * m2 * phase.sin();
        SpectralRatio {
            numerator: ParityPoly::new(1, vec![-(m1s + m2s), 1.0]),
            real_part: ParityPoly::new(0, vec![k, -(o1s + o2s + m1s + m2s), 1.0]),
            gamma,
            g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuintupletParams {
    pub o1: f64,
    pub o2: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub phase: f64,
    pub gamma: f64,
    pub g: f64,
}

/// The composite Rabi quantities of the quintuplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composites {
    /// `|Ω_A|² = m1² + m2² + m3²`
    pub a2: f64,
    /// `|Ω_B|⁴ = m1² m3²`
    pub b4: f64,
    /// `|Ω_C|⁴ = o1² m2² + o1² m3² + o2² m1² + m1² m3²`
    pub c4: f64,
    /// `|Ω_D|⁵ = o1 o2 m1 m2`, entering as `2 |Ω_D|⁵ cos φ`
    pub d5: f64,
    /// `|Ω|² = Σ Ω²`
    pub total2: f64,
}

impl QuintupletParams {
    pub fn new(o1: f64, o2: f64, m1: f64, m2: f64, m3: f64) -> Self {
        QuintupletParams {
            o1,
            o2,
            m1,
            m2,
            m3,
            phase: 0.0,
            gamma: 1.0,
            g: 1.0,
        }
    }

    pub fn uniform(rabi: f64) -> Self {
        Self::new(rabi, rabi, rabi, rabi, rabi)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn composites(&self) -> Composites {
        let Self { o1, o2, m1, m2, m3, .. } = *self;
        let (o1s, o2s, m1s, m2s, m3s) = (o1 * o1, o2 * o2, m1 * m1, m2 * m2, m3 * m3);
        Composites {
            a2: m1s + m2s + m3s,
            b4: m1s * m3s,
            c4: o1s * m2s + o1s * m3s + o2s * m1s + m1s * m3s,
            d5: o1 * o2 * m1 * m2,
            total2: o1s + o2s + m1s + m2s + m3s,
        }
    }

    pub fn ratio(&self) -> SpectralRatio {
        let c = self.composites();
        let linear = c.c4 + 2.0 * c.d5 * self.phase.cos();
        SpectralRatio {
            numerator: ParityPoly::new(0, vec![c.b4, -c.a2, 1.0]),
            real_part: ParityPoly::new(1, vec![linear, -c.total2, 1.0]),
            gamma: self.gamma,
            g: self.g,
        }
    }
}

pub fn doublet_ratio(o1: f64, gamma: f64, g: f64) -> SpectralRatio {
    SpectralRatio {
        numerator: ParityPoly::new(1, vec![1.0]),
        real_part: ParityPoly::new(0, vec![-(o1 * o1), 1.0]),
        gamma,
        g,
    }
}

/// The chain e - g1 - g3 - g2, i.e. the quintuplet with `o2 = m3 = 0`.
pub fn triplet_ratio(o1: f64, m1: f64, m2: f64, gamma: f64, g: f64) -> SpectralRatio {
    let (o1s, m1s, m2s) = (o1 * o1, m1 * m1, m2 * m2);
    SpectralRatio {
        numerator: ParityPoly::new(1, vec![-(m1s + m2s), 1.0]),
        real_part: ParityPoly::new(0, vec![o1s * m2s, -(o1s + m1s + m2s), 1.0]),
        gamma,
        g,
    }
}

pub fn spectrum_quartuplet(p: &QuartupletParams, delta: f64) -> Result<f64> {
    p.ratio().intensity(delta)
}

pub fn spectrum_quintuplet(p: &QuintupletParams, delta: f64) -> Result<f64> {
    p.ratio().intensity(delta)
}

/// `g² Δ² / ((Δ² - o1²)² + Γ² Δ² / 4)`
pub fn spectrum_doublet(o1: f64, gamma: f64, g: f64, delta: f64) -> Result<f64> {
    doublet_ratio(o1, gamma, g).intensity(delta)
}

pub fn spectrum_triplet(o1: f64, m1: f64, m2: f64, gamma: f64, g: f64, delta: f64) -> Result<f64> {
    triplet_ratio(o1, m1, m2, gamma, g).intensity(delta)
}

pub fn peak_height_bound(gamma: f64, g: f64) -> f64 {
    4.0 * g * g / (gamma * gamma)
}

fn symmetric(mut positive: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = positive.iter().map(|d| -d).collect();
    out.append(&mut positive);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| a == b || (*a == 0.0 && *b == 0.0));
    out.iter().map(|&d| if d == 0.0 { 0.0 } else { d }).collect()
}

pub fn dark_lines_quartuplet(p: &QuartupletParams) -> Vec<f64> {
    symmetric(vec![0.0, (p.m1 * p.m1 + p.m2 * p.m2).sqrt()])
}

pub fn dark_lines_quintuplet(p: &QuintupletParams) -> Result<Vec<f64>> {
    let c = p.composites();
    let disc = c.a2 * c.a2 - 4.0 * c.b4;
    if disc < 0.0 {
        return Err(Error::DegenerateDarkLines);
    }
    let root = disc.sqrt();
    let outer = (c.a2 + root) / 2.0;
    // the small root without cancellation
    let inner = if outer > 0.0 { c.b4 / outer } else { 0.0 };
    Ok(symmetric(vec![inner.sqrt(), outer.sqrt()]))
}

/// A closed-form spectrum for one of the recognised topologies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    Doublet {
        o1: f64,
        gamma: f64,
        g: f64,
    },
    Triplet {
        o1: f64,
        m1: f64,
        m2: f64,
        gamma: f64,
        g: f64,
    },
    Quartuplet(QuartupletParams),
    Quintuplet(QuintupletParams),
}

impl ClosedForm {
    pub fn from_topology(t: Topology, gamma: f64, g: f64) -> Self {
        match t {
            Topology::Lorentzian => ClosedForm::Doublet { o1: 0.0, gamma, g },
            Topology::Doublet { o1 } => ClosedForm::Doublet { o1, gamma, g },
            Topology::Triplet { o1, m1, m2 } => ClosedForm::Triplet { o1, m1, m2, gamma, g },
            Topology::Quartuplet { o1, o2, m1, m2, phase } => ClosedForm::Quartuplet(QuartupletParams {
                o1,
                o2,
                m1,
                m2,
                phase,
                gamma,
                g,
            }),
            Topology::Quintuplet {
                o1,
                o2,
                m1,
                m2,
                m3,
                phase,
            } => ClosedForm::Quintuplet(QuintupletParams {
                o1,
                o2,
                m1,
                m2,
                m3,
                phase,
                gamma,
                g,
            }),
        }
    }

    pub fn ratio(&self) -> SpectralRatio {
        match *self {
            ClosedForm::Doublet { o1, gamma, g } => doublet_ratio(o1, gamma, g),
            ClosedForm::Triplet { o1, m1, m2, gamma, g } => triplet_ratio(o1, m1, m2, gamma, g),
            ClosedForm::Quartuplet(p) => p.ratio(),
            ClosedForm::Quintuplet(p) => p.ratio(),
        }
    }

    pub fn intensity(&self, delta: f64) -> Result<f64> {
        self.ratio().intensity(delta)
    }

    /// Real detunings where the spectrum vanishes, ascending. Roots of `N`
    /// that `P` cancels (an undriven ground, say) are left out.
    pub fn zeros(&self) -> Result<Vec<f64>> {
        let candidates = match self {
            ClosedForm::Doublet { .. } => vec![0.0],
            ClosedForm::Triplet { m1, m2, .. } => symmetric(vec![0.0, (m1 * m1 + m2 * m2).sqrt()]),
            ClosedForm::Quartuplet(p) => dark_lines_quartuplet(p),
            ClosedForm::Quintuplet(p) => dark_lines_quintuplet(p)?,
        };
        let ratio = self.ratio();
        let floor = 1e-16 * peak_height_bound(ratio.gamma, ratio.g);
        let mut out = Vec::new();
        for z in candidates {
            if ratio.intensity(z)? <= floor {
                out.push(z);
            }
        }
        Ok(out)
    }
}
