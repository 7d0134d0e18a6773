// Reference distribution values are written at full round-trip precision.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use openloc::spectra::{
    classify_spacings, imag_distribution, ingest_eigenvalues, ks_statistic, poisson_cdf,
    poisson_pdf, spacing_histogram, unfold, wigner_cdf, wigner_pdf, EigenvalueList, SpacingClass,
    SpectraError,
};
use std::path::PathBuf;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Quantile sample of a distribution through its inverse CDF.
fn quantile_sample(n: usize, inv_cdf: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n)
        .map(|i| inv_cdf((i as f64 + 0.5) / n as f64))
        .collect()
}

fn wigner_sample(n: usize) -> Vec<f64> {
    quantile_sample(n, |u| (-4.0 * (1.0 - u).ln() / std::f64::consts::PI).sqrt())
}

fn poisson_sample(n: usize) -> Vec<f64> {
    quantile_sample(n, |u| -(1.0 - u).ln())
}

fn scratch_file(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("openloc_{}_{name}", std::process::id()))
}

#[test]
fn unfold_normalizes_equally_spaced_levels() {
    let reals: Vec<f64> = (0..100).map(|i| 0.25 * i as f64).collect();
    let spacings = unfold(&reals, 11).unwrap();
    // 10 trimmed per side leaves 80 levels and 79 spacings.
    assert_eq!(spacings.len(), 79);
    for s in &spacings {
        assert!((s - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn unfold_flattens_a_slowly_varying_density() {
    let reals: Vec<f64> = (1..400).map(|i| (i as f64).powf(1.5)).collect();
    let spacings = unfold(&reals, 21).unwrap();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    assert!((mean - 1.0).abs() <= 0.02, "unfolded mean {mean}");
}

#[test]
fn unfold_sorts_its_input() {
    let mut reals: Vec<f64> = (0..60).map(|i| i as f64).collect();
    reals.reverse();
    let spacings = unfold(&reals, 5).unwrap();
    assert!(spacings.iter().all(|s| (s - 1.0).abs() <= 1e-12));
}

#[test]
fn unfold_input_validation() {
    let reals: Vec<f64> = (0..50).map(|i| i as f64).collect();
    assert!(matches!(
        unfold(&reals, 10),
        Err(SpectraError::BadWindow { window: 10 })
    ));
    assert!(matches!(unfold(&reals, 0), Err(SpectraError::BadWindow { .. })));
    assert!(matches!(
        unfold(&reals[..10], 11),
        Err(SpectraError::TooFewValues { need: 13, got: 10 })
    ));
    let bad = vec![f64::NAN; 50];
    assert!(matches!(unfold(&bad, 11), Err(SpectraError::NonFinite)));
}

#[test]
fn histogram_densities_integrate_to_one() {
    let sample = wigner_sample(500);
    let hist = spacing_histogram(&sample, 25, (0.0, 4.0)).unwrap();
    assert_eq!(hist.bin_edges.len(), 26);
    assert_eq!(hist.densities.len(), 25);
    let integral: f64 = hist
        .densities
        .iter()
        .zip(hist.bin_edges.windows(2))
        .map(|(d, e)| d * (e[1] - e[0]))
        .sum();
    assert!((integral - 1.0).abs() <= 1e-12);
}

#[test]
fn histogram_counts_and_edges() {
    let hist = spacing_histogram(&[0.5, 1.5], 2, (0.0, 2.0)).unwrap();
    assert_eq!(hist.sample_count, 2);
    assert_eq!(hist.densities, vec![0.5, 0.5]);
    assert_eq!(hist.mean_spacing, 1.0);

    // The last bin is closed: a sample at the upper edge is kept.
    let edge = spacing_histogram(&[2.0], 2, (0.0, 2.0)).unwrap();
    assert_eq!(edge.sample_count, 1);
    assert_eq!(edge.densities, vec![0.0, 1.0]);

    // Out-of-range samples are excluded from the density mass but not from
    // the mean.
    let mixed = spacing_histogram(&[1.0, 9.0], 2, (0.0, 2.0)).unwrap();
    assert_eq!(mixed.sample_count, 1);
    assert_eq!(mixed.mean_spacing, 5.0);
}

#[test]
fn histogram_input_validation() {
    assert!(matches!(
        spacing_histogram(&[], 4, (0.0, 1.0)),
        Err(SpectraError::EmptyInput)
    ));
    assert!(matches!(
        spacing_histogram(&[0.5], 0, (0.0, 1.0)),
        Err(SpectraError::BadBins)
    ));
    assert!(matches!(
        spacing_histogram(&[0.5], 4, (1.0, 0.0)),
        Err(SpectraError::BadRange)
    ));
    assert!(matches!(
        spacing_histogram(&[5.0], 4, (0.0, 1.0)),
        Err(SpectraError::NoSamplesInRange)
    ));
    assert!(matches!(
        spacing_histogram(&[-0.5, 0.5], 4, (0.0, 1.0)),
        Err(SpectraError::NegativeSpacing)
    ));
}

#[test]
fn reference_distributions() {
    assert_eq!(wigner_pdf(0.0).unwrap(), 0.0);
    assert!((wigner_pdf(1.0).unwrap() - 0.71618593634056915).abs() <= 1e-15);
    assert!((poisson_pdf(1.0).unwrap() - 0.36787944117144233).abs() <= 1e-15);
    assert!((wigner_cdf(1.0) - 0.54406187223400382).abs() <= 1e-15);
    assert!((poisson_cdf(1.0) - 0.63212055882855767).abs() <= 1e-15);
    assert!((wigner_cdf(2.0) - 0.9567860817362277).abs() <= 1e-15);
    assert!((poisson_cdf(0.5) - 0.39346934028736658).abs() <= 1e-15);
    assert!(matches!(
        wigner_pdf(-0.1),
        Err(SpectraError::NegativeArgument { .. })
    ));
    assert!(matches!(
        poisson_pdf(-0.1),
        Err(SpectraError::NegativeArgument { .. })
    ));
}

#[test]
fn ks_statistic_known_value() {
    // Two-point sample against the uniform CDF on [0, 1].
    let ks = ks_statistic(&[0.25, 0.75], |x| x.clamp(0.0, 1.0)).unwrap();
    assert!((ks - 0.25).abs() <= 1e-15);
    assert!(matches!(
        ks_statistic(&[], |x| x),
        Err(SpectraError::EmptyInput)
    ));
}

#[test]
fn ks_vanishes_on_quantile_samples() {
    let ks_w = ks_statistic(&wigner_sample(2000), wigner_cdf).unwrap();
    let ks_p = ks_statistic(&poisson_sample(2000), poisson_cdf).unwrap();
    assert!(ks_w <= 1e-3, "wigner self-distance {ks_w}");
    assert!(ks_p <= 1e-3, "poisson self-distance {ks_p}");
}

#[test]
fn classification_labels() {
    let w = classify_spacings(&wigner_sample(2000)).unwrap();
    assert_eq!(w.label, SpacingClass::Wigner);
    assert_eq!(w.samples, 2000);
    assert!(w.ks_wigner < w.ks_poisson - 0.05);

    let p = classify_spacings(&poisson_sample(2000)).unwrap();
    assert_eq!(p.label, SpacingClass::Poisson);

    // A half-and-half mixture sits between both references.
    let mut mixed = wigner_sample(1000);
    mixed.extend(poisson_sample(1000));
    let m = classify_spacings(&mixed).unwrap();
    assert_eq!(m.label, SpacingClass::Intermediate);

    assert!(matches!(
        classify_spacings(&wigner_sample(99)),
        Err(SpectraError::TooFewValues { need: 100, .. })
    ));
    assert_eq!(SpacingClass::Wigner.to_string(), "wigner");
    assert_eq!(SpacingClass::Intermediate.to_string(), "intermediate");
}

#[test]
fn imag_distribution_normalizes_by_gamma() {
    let gamma = 0.5;
    let values: Vec<Complex64> = (0..200)
        .map(|i| z(i as f64, -gamma * (i as f64 + 0.5) / 200.0))
        .collect();
    let list = EigenvalueList::new(values).unwrap();
    let (hist, flagged) = imag_distribution(&list, gamma, 10).unwrap();
    assert_eq!(flagged, 0);
    assert_eq!(hist.sample_count, 200);
    assert_eq!(hist.bin_edges[0], 0.0);
    assert_eq!(hist.bin_edges[10], 1.0);
    // Uniform -Im/gamma over (0, 1): every density is near 1.
    for d in &hist.densities {
        assert!((d - 1.0).abs() <= 0.01);
    }
}

#[test]
fn imag_distribution_flags_out_of_range_values() {
    let mut values: Vec<Complex64> = (0..50).map(|i| z(i as f64, -0.3 * i as f64 / 50.0)).collect();
    values.push(z(0.0, 0.1)); // positive imaginary part: gain, not decay
    values.push(z(0.0, -2.0)); // decays faster than gamma allows
    let list = EigenvalueList::new(values).unwrap();
    let (hist, flagged) = imag_distribution(&list, 0.3, 5).unwrap();
    assert_eq!(flagged, 2);
    // Clipped values still land in the histogram mass.
    assert_eq!(hist.sample_count, 52);
}

#[test]
fn imag_distribution_rejects_closed_systems() {
    let list = EigenvalueList::new(vec![z(0.0, 0.0); 5]).unwrap();
    assert!(matches!(
        imag_distribution(&list, 0.0, 10),
        Err(SpectraError::BadGamma { .. })
    ));
    assert!(matches!(
        imag_distribution(&list, -1.0, 10),
        Err(SpectraError::BadGamma { .. })
    ));
}

#[test]
fn eigenvalue_list_rejects_non_finite() {
    assert!(matches!(
        EigenvalueList::new(vec![z(f64::NAN, 0.0)]),
        Err(SpectraError::NonFinite)
    ));
    let list = EigenvalueList::new(vec![z(1.0, -0.5)]).unwrap();
    assert!(list.source.is_none());
    assert!(list.refractive_index.is_none());
}

#[test]
fn ingest_csv_with_and_without_header() {
    let path = scratch_file("header.csv");
    std::fs::write(&path, "re,im\n1.5,-0.25\n2.0,0.0\n").unwrap();
    let list = ingest_eigenvalues(&path).unwrap();
    assert_eq!(list.values, vec![z(1.5, -0.25), z(2.0, 0.0)]);
    assert_eq!(list.source.as_deref(), Some(path.to_str().unwrap()));

    let bare = scratch_file("bare.csv");
    std::fs::write(&bare, "1.5,-0.25\n2.0,0.0\n").unwrap();
    assert_eq!(ingest_eigenvalues(&bare).unwrap().values.len(), 2);

    std::fs::remove_file(&path).unwrap();
    std::fs::remove_file(&bare).unwrap();
}

#[test]
fn ingest_reports_parse_errors_with_line_numbers() {
    let path = scratch_file("bad.csv");
    std::fs::write(&path, "re,im\n1.0,2.0\noops,3.0\n").unwrap();
    match ingest_eigenvalues(&path) {
        Err(SpectraError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }

    std::fs::write(&path, "1.0,2.0,3.0\n").unwrap();
    match ingest_eigenvalues(&path) {
        Err(SpectraError::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("expected parse error, got {other:?}"),
    }

    std::fs::write(&path, "1.0,inf\n").unwrap();
    assert!(matches!(
        ingest_eigenvalues(&path),
        Err(SpectraError::Parse { .. })
    ));

    std::fs::write(&path, "").unwrap();
    assert!(matches!(
        ingest_eigenvalues(&path),
        Err(SpectraError::EmptyFile { .. })
    ));

    std::fs::remove_file(&path).unwrap();
    assert!(matches!(
        ingest_eigenvalues(&path),
        Err(SpectraError::Io { .. })
    ));
}
