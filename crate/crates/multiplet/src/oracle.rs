//! Spectra straight from the amplitude equations, for any linkage graph.
//!
//! The vacuum amplitude obeys `dG/dt = -i g* e^{-iΔt} E(t)`, so
//! `G(∞) = -i g* Ẽ(iΔ)` with `Ẽ` the Laplace transform of the excited-state
//! amplitude. `spectrum_linear_solve` gets `Ẽ(iΔ)` from `(iΔ - A) x = x0`;
//! `spectrum_time_domain` integrates `dx/dt = A x` and does the Fourier
//! integral by quadrature.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::CoupledSystem;

pub const DEFAULT_HORIZON: f64 = 50.0;
pub const DEFAULT_STEP: f64 = 1e-3;

/// Pivots smaller than this relative to the largest matrix entry count as zero.
const PIVOT_TOLERANCE: f64 = 1e-13;

/// Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// vanishes relative to the matrix scale.
pub fn solve(mut a: Array2<Complex64>, mut b: Array1<Complex64>) -> Option<Array1<Complex64>> {
    let n = b.len();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[[r, col]].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot <= PIVOT_TOLERANCE * scale || pivot == 0.0 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap([col, k], [pivot_row, k]);
            }
            b.swap(col, pivot_row);
        }
        let inv = a[[col, col]].inv();
        for r in col + 1..n {
            let factor = a[[r, col]] * inv;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[[col, k]];
                a[[r, k]] -= factor * v;
            }
            let v = b[col];
            b[r] -= factor * v;
        }
    }
    let mut x = Array1::<Complex64>::zeros(n);
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc -= a[[r, k]] * x[k];
        }
        x[r] = acc / a[[r, r]];
    }
    Some(x)
}

/// Driven states reachable from the initial state through nonzero couplings,
/// ascending. The others stay unpopulated and only make the system singular.
fn reachable(system: &CoupledSystem) -> Vec<usize> {
    let a = system.matrix();
    let n = system.dim();
    let start = system.x0().iter().position(|z| z.norm() > 0.0).unwrap_or(0);
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && (a[[i, j]].norm() > 0.0 || a[[j, i]].norm() > 0.0) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

pub fn spectrum_linear_solve(system: &CoupledSystem, delta: f64) -> Result<f64> {
    let keep = reachable(system);
    if keep[0] != 0 {
        // the excited state is never populated
        return Ok(0.0);
    }
    let n = keep.len();
    let a = system.matrix();
    let mut m = Array2::<Complex64>::zeros((n, n));
    for (r, &i) in keep.iter().enumerate() {
        for (c, &j) in keep.iter().enumerate() {
            m[[r, c]] = -a[[i, j]];
        }
        m[[r, r]] += Complex64::new(0.0, delta);
    }
    let b = keep.iter().map(|&i| system.x0()[i]).collect();
    let x = solve(m, b).ok_or(Error::SingularSystem(delta))?;
    Ok(system.g() * system.g() * x[0].norm_sqr())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Array1<Complex64>>,
}

impl TimeTrajectory {
    pub fn excited(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.amplitudes.iter().map(|x| x[0])
    }

    pub fn norm_sqr(&self, k: usize) -> f64 {
        self.amplitudes[k].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Amplitude norm still undecayed at the horizon. The truncated Fourier
    /// integral misses a tail of about this size.
    pub fn tail_norm(&self) -> f64 {
        self.norm_sqr(self.times.len() - 1).sqrt()
    }
}

/// Tail norms above this make time-domain spectra visibly truncated.
pub const TAIL_WARNING: f64 = 1e-4;

pub fn tail_warning(traj: &TimeTrajectory) -> Option<String> {
    let tail = traj.tail_norm();
    let horizon = traj.times[traj.times.len() - 1];
    (tail > TAIL_WARNING).then(|| {
        format!("amplitude norm {tail:.3e} remains at horizon {horizon}; the time-domain spectrum is truncated (raise --horizon)")
    })
}

fn check_step(horizon: f64, step: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidStep(format!("horizon must be positive, got {horizon}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStep(format!("step must be positive, got {step}")));
    }
    if step > horizon / 100.0 {
        return Err(Error::InvalidStep(format!(
            "step {step} exceeds horizon/100 = {}",
            horizon / 100.0
        )));
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta with a fixed step. The last step is
/// shortened to land exactly on the horizon.
pub fn integrate(system: &CoupledSystem, horizon: f64, step: f64) -> Result<TimeTrajectory> {
    check_step(horizon, step)?;
    let a = system.matrix();
    let f = |x: &Array1<Complex64>| a.dot(x);
    let steps = (horizon / step).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut amplitudes = Vec::with_capacity(steps + 1);
    let mut x = system.x0().clone();
    let mut t = 0.0;
    times.push(t);
    amplitudes.push(x.clone());
    for k in 0..steps {
        let h = if k + 1 == steps { horizon - t } else { step };
        let k1 = f(&x);
        let k2 = f(&(&x + &(&k1 * Complex64::new(h / 2.0, 0.0))));
        let k3 = f(&(&x + &(&k2 * Complex64::new(h / 2.0, 0.0))));
        let k4 = f(&(&x + &(&k3 * Complex64::new(h, 0.0))));
        let incr = (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
        x = x + incr;
        t = if k + 1 == steps { horizon } else { (k + 1) as f64 * step };
        times.push(t);
        amplitudes.push(x.clone());
    }
    Ok(TimeTrajectory { times, amplitudes })
}

/// `∫ f(t) dt` over the trajectory samples: composite Simpson on the uniform
/// part, trapezoid on a leftover or shortened last interval.
fn quadrature(times: &[f64], values: &[Complex64]) -> Complex64 {
    let n = times.len() - 1;
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let h = times[1] - times[0];
    let last = times[n] - times[n - 1];
    let uniform = if (last - h).abs() <= 1e-12 * h { n } else { n - 1 };
    let simpson = uniform - uniform % 2;
    let mut acc = Complex64::new(0.0, 0.0);
    if simpson > 0 {
        let mut s = values[0] + values[simpson];
        for (k, v) in values.iter().enumerate().take(simpson).skip(1) {
            s += v * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc += s * (h / 3.0);
    }
    for k in simpson..n {
        acc += (values[k] + values[k + 1]) * ((times[k + 1] - times[k]) / 2.0);
    }
    acc
}

/// `|G(∞; Δ)|²` from one trajectory, truncating the Fourier integral at the
/// trajectory's last time.
pub fn spectrum_from_trajectory(traj: &TimeTrajectory, g: f64, delta: f64) -> f64 {
    let values: Vec<Complex64> = traj
        .times
        .iter()
        .zip(traj.excited())
        .map(|(&t, e)| Complex64::from_polar(1.0, -delta * t) * e)
        .collect();
    let integral = quadrature(&traj.times, &values);
    g * g * integral.norm_sqr()
}

pub fn spectrum_time_domain(system: &CoupledSystem, delta: f64, horizon: f64, step: f64) -> Result<f64> {
    let traj = integrate(system, horizon, step)?;
    Ok(spectrum_from_trajectory(&traj, system.g(), delta))
}

/// `Γ ∫₀^T |E(t)|² dt`, the probability emitted by time `T`.
pub fn emitted_probability(traj: &TimeTrajectory, gamma: f64) -> f64 {
    let values: Vec<Complex64> = traj.excited().map(|e| Complex64::new(e.norm_sqr(), 0.0)).collect();
    gamma * quadrature(&traj.times, &values).re
}
