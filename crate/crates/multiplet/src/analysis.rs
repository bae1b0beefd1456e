//! Dark lines, peaks and line widths of sampled spectra.
//!
//! Peaks and minima are located on the grid and then polished against the
//! spectrum function itself, so the widths and zero positions do not carry
//! the grid spacing as an error.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Method, SpectrumSeries};

pub const DEFAULT_POINTS: usize = 8001;
pub const DARK_LINE_THRESHOLD: f64 = 1e-9;
pub const PEAK_FLOOR: f64 = 1e-9;
pub const FWHM_TOLERANCE: f64 = 1e-9;
const MAX_WIDENINGS: usize = 6;

/// Half width of the default analysis window for a given effective Rabi
/// frequency.
pub fn default_half_width(effective_rabi: f64) -> f64 {
    3.0 + 2.0 * effective_rabi
}

pub fn grid(dmin: f64, dmax: f64, points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 points, got {points}")));
    }
    if !(dmin.is_finite() && dmax.is_finite() && dmin < dmax) {
        return Err(Error::InvalidGrid(format!("need dmin < dmax, got [{dmin}, {dmax}]")));
    }
    let span = dmax - dmin;
    let last = (points - 1) as f64;
    let mut out: Vec<f64> = (0..points).map(|k| dmin + span * (k as f64 / last)).collect();
    out[points - 1] = dmax;
    Ok(out)
}

pub fn sample<F>(f: F, dmin: f64, dmax: f64, points: usize, method: Method) -> Result<SpectrumSeries>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let deltas = grid(dmin, dmax, points)?;
    let values = deltas.par_iter().map(|&d| f(d)).collect::<Result<Vec<f64>>>()?;
    Ok(SpectrumSeries { deltas, values, method })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: f64,
    pub height: f64,
    /// Grid index of the sampled maximum.
    pub index: usize,
}

pub fn find_peaks(series: &SpectrumSeries) -> Vec<Peak> {
    let v = &series.values;
    let d = &series.deltas;
    let floor = PEAK_FLOOR * series.max();
    let mut out = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > floor) {
            continue;
        }
        let curvature = v[i - 1] - 2.0 * v[i] + v[i + 1];
        let offset = if curvature < 0.0 {
            0.5 * (v[i - 1] - v[i + 1]) / curvature
        } else {
            0.0
        };
        let h = if offset >= 0.0 {
            d[i + 1] - d[i]
        } else {
            d[i] - d[i - 1]
        };
        out.push(Peak {
            location: d[i] + offset * h,
            height: v[i] - 0.25 * (v[i - 1] - v[i + 1]) * offset,
            index: i,
        });
    }
    out
}

/// Golden-section search for an extremum of `f` inside `[lo, hi]`.
fn golden<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64, maximize: bool) -> Result<(f64, f64)> {
    let sign = if maximize { -1.0 } else { 1.0 };
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let mut fa = sign * f(a)?;
    let mut fb = sign * f(b)?;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = sign * f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = sign * f(b)?;
        }
    }
    let (x, fx) = if fa <= fb { (a, fa) } else { (b, fb) };
    Ok((x, sign * fx))
}

/// Move a grid peak onto the true maximum of `f` between its neighbours.
pub fn polish_peak<F: Fn(f64) -> Result<f64>>(series: &SpectrumSeries, peak: &Peak, f: &F) -> Result<Peak> {
    let i = peak.index;
    let (x, fx) = golden(f, series.deltas[i - 1], series.deltas[i + 1], true)?;
    let (x, fx) = if fx >= series.values[i] {
        (x, fx)
    } else {
        (series.deltas[i], series.values[i])
    };
    Ok(Peak {
        location: x,
        height: fx,
        index: i,
    })
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, level: f64, mut above: f64, mut below: f64) -> Result<f64> {
    while (above - below).abs() > FWHM_TOLERANCE {
        let mid = 0.5 * (above + below);
        if f(mid)? > level {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(0.5 * (above + below))
}

/// Full width at half maximum. The search on each side stops at the first
/// grid point at or below half height; if the spectrum turns upward first
/// (a minimum above half height) or the grid ends, the crossing is
/// unbracketed.
pub fn fwhm<F: Fn(f64) -> Result<f64>>(series: &SpectrumSeries, peak: &Peak, f: &F) -> Result<f64> {
    let v = &series.values;
    let d = &series.deltas;
    let half = peak.height / 2.0;
    let unbracketed = Error::UnbracketedCrossing(peak.location);

    let mut right = None;
    for j in peak.index + 1..v.len() {
        if v[j] <= half {
            right = Some(j);
            break;
        }
        if v[j] > v[j - 1] && j > peak.index + 1 {
            break;
        }
    }
    let mut left = None;
    for j in (0..peak.index).rev() {
        if v[j] <= half {
            left = Some(j);
            break;
        }
        if v[j] > v[j + 1] && j + 1 < peak.index {
            break;
        }
    }
    let (Some(r), Some(l)) = (right, left) else {
        return Err(unbracketed);
    };
    let hi = bisect(f, half, d[r - 1].max(peak.location.min(d[r])), d[r])?;
    let lo = bisect(f, half, d[l + 1].min(peak.location.max(d[l])), d[l])?;
    Ok(hi - lo)
}

/// Grid minima where the spectrum vanishes to within `1e-9` of its maximum,
/// located by golden-section search on `f`.
pub fn dark_lines<F: Fn(f64) -> Result<f64>>(series: &SpectrumSeries, f: &F) -> Result<Vec<f64>> {
    let v = &series.values;
    let d = &series.deltas;
    let threshold = DARK_LINE_THRESHOLD * series.max();
    let mut out = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if !(v[i] <= v[i - 1] && v[i] < v[i + 1]) {
            continue;
        }
        if v[i] == 0.0 {
            out.push(d[i]);
            continue;
        }
        let (x, fx) = golden(f, d[i - 1], d[i + 1], false)?;
        let (x, fx) = if fx <= v[i] { (x, fx) } else { (d[i], v[i]) };
        if fx < threshold {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportPeak {
    pub location: f64,
    pub height: f64,
    pub fwhm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub dmin: f64,
    pub dmax: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub method: Method,
    pub gamma: f64,
    pub dark_lines: Vec<f64>,
    pub peaks: Vec<ReportPeak>,
    pub fwhm_sum: f64,
    pub sum_rule_deviation: f64,
    pub grid: GridInfo,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SpectralReport {
    pub fn widths(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.fwhm).collect()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.location).collect()
    }
}

pub fn report<F: Fn(f64) -> Result<f64>>(series: &SpectrumSeries, f: &F, gamma: f64) -> Result<SpectralReport> {
    let mut peaks = Vec::new();
    for p in find_peaks(series) {
        let p = polish_peak(series, &p, f)?;
        let width = fwhm(series, &p, f)?;
        peaks.push(ReportPeak {
            location: p.location,
            height: p.height,
            fwhm: width,
        });
    }
    let fwhm_sum: f64 = peaks.iter().map(|p| p.fwhm).sum();
    Ok(SpectralReport {
        method: series.method,
        gamma,
        dark_lines: dark_lines(series, f)?,
        peaks,
        fwhm_sum,
        sum_rule_deviation: (fwhm_sum - gamma).abs() / gamma,
        grid: GridInfo {
            dmin: series.deltas[0],
            dmax: series.deltas[series.len() - 1],
            points: series.len(),
        },
        warnings: Vec::new(),
    })
}

/// Report on a symmetric window `±half_width`, doubling the window while a
/// half-maximum crossing falls outside it.
pub fn report_widening<F>(f: &F, half_width: f64, points: usize, method: Method, gamma: f64) -> Result<SpectralReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut w = half_width;
    let mut attempt = 0;
    loop {
        let series = sample(f, -w, w, points, method)?;
        match report(&series, f, gamma) {
            Err(Error::UnbracketedCrossing(_)) if attempt < MAX_WIDENINGS => {
                w *= 2.0;
                attempt += 1;
            }
            other => return other,
        }
    }
}
