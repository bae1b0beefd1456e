use std::f64::consts::PI;

use multiplet::analysis::{
    dark_lines, default_half_width, find_peaks, fwhm, polish_peak, report, report_widening, sample, DEFAULT_POINTS,
};
use multiplet::closed_form::{ClosedForm, QuartupletParams, QuintupletParams};
use multiplet::linkage_dsl::preset;
use multiplet::model::{compile, coupling_norm, Method};
use multiplet::oracle::spectrum_linear_solve;
use multiplet::{Error, Result};
use proptest::prelude::*;

fn lorentz(d: f64) -> Result<f64> {
    Ok(1.0 / (d * d + 0.25))
}

fn quartuplet(o1: f64, o2: f64, m1: f64, m2: f64) -> ClosedForm {
    ClosedForm::Quartuplet(QuartupletParams::new(o1, o2, m1, m2).with_phase(2.0 * PI))
}

fn quintuplet(o1: f64, o2: f64, m1: f64, m2: f64, m3: f64) -> ClosedForm {
    ClosedForm::Quintuplet(QuintupletParams::new(o1, o2, m1, m2, m3).with_phase(2.0 * PI))
}

fn analyse(form: &ClosedForm) -> multiplet::analysis::SpectralReport {
    let norm = form_norm(form);
    report_widening(
        &|d| form.intensity(d),
        default_half_width(norm),
        DEFAULT_POINTS,
        Method::ClosedForm,
        1.0,
    )
    .unwrap()
}

fn form_norm(form: &ClosedForm) -> f64 {
    match *form {
        ClosedForm::Quartuplet(p) => (p.o1 * p.o1 + p.o2 * p.o2 + p.m1 * p.m1 + p.m2 * p.m2).sqrt(),
        ClosedForm::Quintuplet(p) => p.composites().total2.sqrt(),
        ClosedForm::Doublet { o1, .. } => o1,
        ClosedForm::Triplet { o1, m1, m2, .. } => (o1 * o1 + m1 * m1 + m2 * m2).sqrt(),
    }
}

fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(actual.len(), expected.len(), "{actual:?}");
    for (a, e) in actual.iter().zip(expected) {
        assert!((a - e).abs() < tol, "{actual:?} vs {expected:?}");
    }
}

#[test]
fn sampling_examples() {
    let s = sample(lorentz, -6.0, 6.0, 1201, Method::ClosedForm).unwrap();
    assert_eq!(s.len(), 1201);
    assert_eq!(s.max(), 4.0);
    assert_eq!(s.deltas[600], 0.0);

    let q = quartuplet(0.5, 0.5, 0.5, 0.5);
    let f = |d| q.intensity(d);
    let s = sample(f, -3.0, 3.0, 6001, Method::ClosedForm).unwrap();
    assert_eq!(dark_lines(&s, &f).unwrap().len(), 3);

    assert!(matches!(
        sample(lorentz, -1.0, 1.0, 2, Method::ClosedForm),
        Err(Error::InvalidGrid(_))
    ));
}

#[test]
fn lorentzian_peak() {
    let s = sample(lorentz, -6.0, 6.0, 1201, Method::ClosedForm).unwrap();
    let peaks = find_peaks(&s);
    assert_eq!(peaks.len(), 1);
    assert!(peaks[0].location.abs() < 1e-9);
    assert!((peaks[0].height - 4.0).abs() < 1e-6);
    assert!((fwhm(&s, &peaks[0], &lorentz).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn peak_counts() {
    let q = quartuplet(0.5, 0.5, 0.5, 0.5);
    let s = sample(|d| q.intensity(d), -3.0, 3.0, 6001, Method::ClosedForm).unwrap();
    let p = find_peaks(&s);
    assert_eq!(p.len(), 4);
    assert!((p[0].location + p[3].location).abs() < 1e-3);
    assert!((p[1].location + p[2].location).abs() < 1e-3);

    let v = quintuplet(0.5, 0.5, 0.5, 0.5, 0.5);
    let f = |d| v.intensity(d);
    let s = sample(f, -3.0, 3.0, 6001, Method::ClosedForm).unwrap();
    let p = find_peaks(&s);
    assert_eq!(p.len(), 5);
    assert!(polish_peak(&s, &p[2], &f).unwrap().location.abs() < 1e-8);
}

#[test]
fn equal_rabi_widths() {
    let r = analyse(&quartuplet(0.5, 0.5, 0.5, 0.5));
    assert_close(&r.widths(), &[0.269594, 0.230406, 0.230406, 0.269594], 1e-6);
    assert_close(&r.dark_lines, &[-0.5f64.sqrt(), 0.0, 0.5f64.sqrt()], 1e-9);
    assert!(r.sum_rule_deviation < 1e-8);

    let r = analyse(&quintuplet(0.5, 0.5, 0.5, 0.5, 0.5));
    assert_close(&r.widths(), &[0.224101, 0.197101, 0.157597, 0.197101, 0.224101], 1e-6);
    assert_close(&r.dark_lines, &[-0.809017, -0.309017, 0.309017, 0.809017], 1e-6);
    assert!(r.sum_rule_deviation < 1e-8);
}

#[test]
fn strong_loop_pairs_share_widths() {
    let r = analyse(&quartuplet(4.0, 1.0, 4.0, 1.0));
    let w = r.widths();
    assert!((w[1] - w[2]).abs() < 1e-9 && (w[0] - w[3]).abs() < 1e-9);
    assert_close(&w, &[0.250486, 0.249514, 0.249514, 0.250486], 1e-6);
    assert!(r.sum_rule_deviation < 0.02);
}

#[test]
fn strong_first_optical_field_quintuplet() {
    let r = analyse(&quintuplet(4.0, 1.0, 1.0, 1.0, 1.0));
    assert_close(&r.widths(), &[0.481645, 0.006455, 0.023801, 0.006455, 0.481645], 1e-6);
    assert!(r.sum_rule_deviation < 0.02);
}

#[test]
fn all_three_quintuplet_spreads_out() {
    let wide = analyse(&quintuplet(3.0, 3.0, 3.0, 3.0, 3.0));
    let narrow = analyse(&quintuplet(0.5, 0.5, 0.5, 0.5, 0.5));
    assert_close(
        &wide.widths(),
        &[0.169353, 0.247452, 0.166389, 0.247452, 0.169353],
        1e-6,
    );
    let spacing = |r: &multiplet::analysis::SpectralReport| {
        let l = r.locations();
        l[l.len() - 1] - l[0]
    };
    assert!(spacing(&wide) > 5.0 * spacing(&narrow));
}

#[test]
fn lorentzian_report() {
    let s = sample(lorentz, -6.0, 6.0, DEFAULT_POINTS, Method::ClosedForm).unwrap();
    let r = report(&s, &lorentz, 1.0).unwrap();
    assert!(r.dark_lines.is_empty());
    assert_eq!(r.peaks.len(), 1);
    assert!(r.sum_rule_deviation < 1e-3);
}

#[test]
fn narrowing_is_monotone() {
    let mut last: Option<Vec<f64>> = None;
    for o1 in [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let w = analyse(&quartuplet(o1, 1.0, 1.0, 1.0)).widths();
        assert_eq!(w.len(), 4);
        if let Some(prev) = last {
            assert!(w[1] < prev[1] && w[2] < prev[2], "central {w:?} after {prev:?}");
            assert!(w[0] > prev[0] && w[3] > prev[3], "side {w:?} after {prev:?}");
        }
        last = Some(w);
    }
}

#[test]
fn unbracketed_crossing_on_a_tight_window() {
    let q = quartuplet(0.5, 0.5, 0.5, 0.5);
    let f = |d| q.intensity(d);
    let s = sample(f, -0.95, 0.95, 1901, Method::ClosedForm).unwrap();
    let outer = find_peaks(&s)[0];
    assert!(matches!(fwhm(&s, &outer, &f), Err(Error::UnbracketedCrossing(_))));
}

fn interleaved(r: &multiplet::analysis::SpectralReport) -> bool {
    let l = r.locations();
    r.dark_lines.len() + 1 == l.len() && r.dark_lines.iter().enumerate().all(|(k, z)| l[k] < *z && *z < l[k + 1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sum_rule_and_interleaving(
        r in prop::collection::vec(0.3..3.0f64, 5),
        phase in 0.0..(2.0 * PI),
    ) {
        for form in [
            ClosedForm::Quartuplet(QuartupletParams::new(r[0], r[1], r[2], r[3]).with_phase(phase)),
            ClosedForm::Quintuplet(QuintupletParams::new(r[0], r[1], r[2], r[3], r[4]).with_phase(phase)),
        ] {
            let rep = analyse(&form);
            prop_assert!(rep.sum_rule_deviation < 0.02, "{:?}", rep.widths());
            prop_assert!(interleaved(&rep), "{:?} {:?}", rep.locations(), rep.dark_lines);
        }
    }

    #[test]
    fn symmetric_pairs_have_equal_widths(r in prop::collection::vec(0.3..3.0f64, 4)) {
        // sin φ = 0 kills the phase term; the spectrum is even
        let form = ClosedForm::Quartuplet(QuartupletParams::new(r[0], r[1], r[2], r[3]));
        let w = analyse(&form).widths();
        let n = w.len();
        for k in 0..n / 2 {
            prop_assert!((w[k] - w[n - 1 - k]).abs() < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn oracle_sextuplet_obeys_sum_rule(r in prop::collection::vec(0.5..2.0f64, 7)) {
        let graph = preset("sextuplet", &r, 0.0).unwrap();
        let sys = compile(&graph);
        let f = |d| spectrum_linear_solve(&sys, d);
        let rep = report_widening(&f, default_half_width(coupling_norm(&graph)), 4001, Method::LinearSolve, 1.0)
            .unwrap();
        prop_assert!(rep.sum_rule_deviation < 0.02, "{:?}", rep.widths());
    }
}
