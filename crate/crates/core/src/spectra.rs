//! Level statistics: spectral unfolding, spacing histograms, Wigner/Poisson
//! references with KS classification, normalized imaginary-part
//! distributions, and ingestion of complex-eigenvalue CSV files.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("window must be an odd positive integer, got {window}")]
    BadWindow { window: usize },
    #[error("values must be finite")]
    NonFinite,
    #[error("spacings must be non-negative")]
    NegativeSpacing,
    #[error("input is empty")]
    EmptyInput,
    #[error("histogram needs at least one bin")]
    BadBins,
    #[error("histogram range must be finite with lower < upper")]
    BadRange,
    #[error("no samples fall inside the histogram range")]
    NoSamplesInRange,
    #[error("spacing argument must be non-negative, got {s}")]
    NegativeArgument { s: f64 },
    #[error("gamma must be positive to normalize imaginary parts, got {gamma}")]
    BadGamma { gamma: f64 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: no eigenvalue rows")]
    EmptyFile { path: String },
}

/// Complex eigenvalues with optional source metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueList {
    pub values: Vec<Complex64>,
    pub source: Option<String>,
    pub refractive_index: Option<f64>,
}

impl EigenvalueList {
    pub fn new(values: Vec<Complex64>) -> Result<Self, SpectraError> {
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SpectraError::NonFinite);
        }
        Ok(EigenvalueList {
            values,
            source: None,
            refractive_index: None,
        })
    }
}

/// Density-normalized histogram of spacings or normalized imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    /// bins + 1 monotone edges.
    pub bin_edges: Vec<f64>,
    /// Densities integrate to one over the in-range samples.
    pub densities: Vec<f64>,
    /// Number of samples inside the range (the normalization mass).
    pub sample_count: usize,
    /// Arithmetic mean of all input samples, in-range or not.
    pub mean_spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingClass {
    Wigner,
    Poisson,
    Intermediate,
}

impl std::fmt::Display for SpacingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpacingClass::Wigner => "wigner",
            SpacingClass::Poisson => "poisson",
            SpacingClass::Intermediate => "intermediate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: SpacingClass,
    pub ks_wigner: f64,
    pub ks_poisson: f64,
    pub samples: usize,
}

/// Sorts, trims 10% of the values at each spectral edge, and divides each
/// nearest-neighbor spacing by the local mean spacing over a centered window.
///
/// The trimmed edges and the local mean remove the global density profile so
/// the output spacings have mean 1 (within a couple of percent for smooth
/// densities).
pub fn unfold(reals: &[f64], window: usize) -> Result<Vec<f64>, SpectraError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(SpectraError::BadWindow { window });
    }
    if reals.len() < window + 2 {
        return Err(SpectraError::TooFewValues {
            need: window + 2,
            got: reals.len(),
        });
    }
    if reals.iter().any(|v| !v.is_finite()) {
        return Err(SpectraError::NonFinite);
    }
    let mut sorted = reals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let trim = reals.len() / 10;
    let kept = &sorted[trim..sorted.len() - trim];
    let spacings: Vec<f64> = kept.windows(2).map(|w| w[1] - w[0]).collect();
    let half = window / 2;
    let mut out = Vec::with_capacity(spacings.len());
    for i in 0..spacings.len() {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(spacings.len());
        let local = spacings[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        out.push(if local > 0.0 { spacings[i] / local } else { 0.0 });
    }
    Ok(out)
}

/// Histogram with densities normalized over the samples inside `range`;
/// the last bin is closed so the upper edge is included.
pub fn spacing_histogram(
    spacings: &[f64],
    bins: usize,
    range: (f64, f64),
) -> Result<SpacingHistogram, SpectraError> {
    if spacings.is_empty() {
        return Err(SpectraError::EmptyInput);
    }
    if bins == 0 {
        return Err(SpectraError::BadBins);
    }
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(SpectraError::BadRange);
    }
    if spacings.iter().any(|v| !v.is_finite()) {
        return Err(SpectraError::NonFinite);
    }
    if spacings.iter().any(|&v| v < 0.0) {
        return Err(SpectraError::NegativeSpacing);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut inside = 0usize;
    for &x in spacings {
        if x < lo || x > hi {
            continue;
        }
        let mut b = ((x - lo) / width) as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
        inside += 1;
    }
    if inside == 0 {
        return Err(SpectraError::NoSamplesInRange);
    }
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| ((bins - i) as f64 * lo + i as f64 * hi) / bins as f64)
        .collect();
    let densities: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (inside as f64 * width))
        .collect();
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    Ok(SpacingHistogram {
        bin_edges,
        densities,
        sample_count: inside,
        mean_spacing,
    })
}

/// GOE Wigner surmise (pi/2) s exp(-pi s^2 / 4).
pub fn wigner_pdf(s: f64) -> Result<f64, SpectraError> {
    if !s.is_finite() || s < 0.0 {
        return Err(SpectraError::NegativeArgument { s });
    }
    Ok(0.5 * PI * s * (-0.25 * PI * s * s).exp())
}

/// Unit-mean exponential exp(-s).
pub fn poisson_pdf(s: f64) -> Result<f64, SpectraError> {
    if !s.is_finite() || s < 0.0 {
        return Err(SpectraError::NegativeArgument { s });
    }
    Ok((-s).exp())
}

pub fn wigner_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-0.25 * PI * s * s).exp()
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

/// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64, SpectraError> {
    if sample.is_empty() {
        return Err(SpectraError::EmptyInput);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(SpectraError::NonFinite);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((((i + 1) as f64) / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    Ok(d)
}

/// KS comparison against the Wigner and Poisson references with a 0.05
/// decision margin; anything inside the margin is labeled intermediate.
pub fn classify_spacings(spacings: &[f64]) -> Result<Classification, SpectraError> {
    if spacings.len() < 100 {
        return Err(SpectraError::TooFewValues {
            need: 100,
            got: spacings.len(),
        });
    }
    if spacings.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(SpectraError::NegativeSpacing);
    }
    let ks_wigner = ks_statistic(spacings, wigner_cdf)?;
    let ks_poisson = ks_statistic(spacings, poisson_cdf)?;
    let label = if ks_wigner < ks_poisson - 0.05 {
        SpacingClass::Wigner
    } else if ks_poisson < ks_wigner - 0.05 {
        SpacingClass::Poisson
    } else {
        SpacingClass::Intermediate
    };
    Ok(Classification {
        label,
        ks_wigner,
        ks_poisson,
        samples: spacings.len(),
    })
}

/// Histogram of -Im(lambda)/gamma clipped to [0, 1].
///
/// Returns the histogram together with the number of values lying outside
/// [0, 1] by more than 1e-9 * N before clipping.
pub fn imag_distribution(
    values: &EigenvalueList,
    gamma: f64,
    bins: usize,
) -> Result<(SpacingHistogram, usize), SpectraError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(SpectraError::BadGamma { gamma });
    }
    if values.values.len() < 3 {
        return Err(SpectraError::TooFewValues {
            need: 3,
            got: values.values.len(),
        });
    }
    let tol = 1e-9 * values.values.len() as f64;
    let mut flagged = 0usize;
    let normalized: Vec<f64> = values
        .values
        .iter()
        .map(|z| {
            let x = -z.im / gamma;
            if x < -tol || x > 1.0 + tol {
                flagged += 1;
            }
            x.clamp(0.0, 1.0)
        })
        .collect();
    let hist = spacing_histogram(&normalized, bins, (0.0, 1.0))?;
    Ok((hist, flagged))
}

/// Reads an eigenvalue CSV: optional `re,im` header, then rows of two floats.
pub fn ingest_eigenvalues<P: AsRef<Path>>(path: P) -> Result<EigenvalueList, SpectraError> {
    let path_str = path.as_ref().display().to_string();
    let text = fs::read_to_string(&path).map_err(|source| SpectraError::Io {
        path: path_str.clone(),
        source,
    })?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if idx == 0 && is_header(line) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(SpectraError::Parse {
                path: path_str,
                line: line_no,
                msg: format!("expected two comma-separated fields, got {}", fields.len()),
            });
        }
        let mut parts = [0.0_f64; 2];
        for (slot, field) in parts.iter_mut().zip(&fields) {
            let v: f64 = field.trim().parse().map_err(|e| SpectraError::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("bad float {:?}: {e}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(SpectraError::Parse {
                    path: path_str,
                    line: line_no,
                    msg: format!("non-finite value {:?}", field.trim()),
                });
            }
            *slot = v;
        }
        values.push(Complex64::new(parts[0], parts[1]));
    }
    if values.is_empty() {
        return Err(SpectraError::EmptyFile { path: path_str });
    }
    let mut list = EigenvalueList::new(values)?;
    list.source = Some(path_str);
    Ok(list)
}

fn is_header(line: &str) -> bool {
    let lower = line.to_ascii_lowercase();
    let fields: Vec<&str> = lower.split(',').map(str::trim).collect();
    fields == ["re", "im"]
}
