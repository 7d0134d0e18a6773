//! Random non-Hermitian ensemble H' = H0' - i gamma H1': uniform diagonal
//! energies, real symmetric off-diagonal couplings, uniform decay rates,
//! inverse participation ratios, and (c, gamma) sweeps.

use crate::linalg::{eigendecompose, ComplexMatrix, LinalgError, SolverOptions, Spectrum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),
    #[error("zero vector has no participation ratio")]
    ZeroVector,
    #[error("spectrum carries {got} eigenvectors, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sweep grid must contain at least one (c, gamma) node")]
    EmptyGrid,
    #[error("sweep needs at least one realization")]
    NoRealizations,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Parameters of one ensemble draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n: usize,
    pub c: f64,
    pub gamma: f64,
    pub seed: u64,
    pub realization: u64,
}

impl EnsembleParams {
    pub fn new(
        n: usize,
        c: f64,
        gamma: f64,
        seed: u64,
        realization: u64,
    ) -> Result<Self, EnsembleError> {
        if n < 2 {
            return Err(EnsembleError::InvalidParams(format!(
                "dimension N must be at least 2, got {n}"
            )));
        }
        if !c.is_finite() || c < 0.0 {
            return Err(EnsembleError::InvalidParams(format!(
                "coupling bound c must be finite and non-negative, got {c}"
            )));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(EnsembleError::InvalidParams(format!(
                "opening strength gamma must be finite and non-negative, got {gamma}"
            )));
        }
        Ok(EnsembleParams {
            n,
            c,
            gamma,
            seed,
            realization,
        })
    }
}

/// SplitMix64-style finalizer used to derive independent substream seeds.
pub fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform draw from the open interval (0, 1).
fn open01(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.gen();
        if v != 0.0 {
            return v;
        }
    }
}

/// Uniform draw from the open interval (-b, b), b > 0.
fn open_sym(rng: &mut ChaCha8Rng, b: f64) -> f64 {
    loop {
        let x = b * (2.0 * open01(rng) - 1.0);
        if x.abs() < b {
            return x;
        }
    }
}

/// Draws H' = H0' - i gamma H1' for the given parameters.
///
/// Diagonal real parts eps_j are uniform in (-1, 1), off-diagonals are real
/// symmetric uniform in (-c, c), and diagonal imaginary parts are -gamma g_j
/// with g_j uniform in (0, 1). The draw order is: all eps_j, then the strict
/// upper triangle row by row (skipped entirely when c = 0), then all g_j.
/// Fully determined by (seed, realization, N, c, gamma).
pub fn sample_hamiltonian(p: &EnsembleParams) -> ComplexMatrix {
    let n = p.n;
    let c = p.c;
    let gamma = p.gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(p.seed, p.realization));
    let eps: Vec<f64> = (0..n).map(|_| open_sym(&mut rng, 1.0)).collect();
    let mut m = ComplexMatrix::zeros(n).expect("n >= 2");
    if c > 0.0 {
        for j in 0..n {
            for k in j + 1..n {
                let v = Complex64::new(open_sym(&mut rng, c), 0.0);
                m.set(j, k, v);
                m.set(k, j, v);
            }
        }
    }
    for (j, &e) in eps.iter().enumerate() {
        let g = open01(&mut rng);
        let im = if gamma == 0.0 { 0.0 } else { -gamma * g };
        m.set(j, j, Complex64::new(e, im));
    }
    m
}

/// Inverse participation ratio sum |a_j|^4 / (sum |a_j|^2)^2; scale-invariant.
pub fn ipr(state: &[Complex64]) -> Result<f64, EnsembleError> {
    let peak = state.iter().map(|z| z.norm_sqr()).fold(0.0_f64, f64::max);
    if peak == 0.0 || state.is_empty() {
        return Err(EnsembleError::ZeroVector);
    }
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for z in state {
        let w = z.norm_sqr() / peak;
        s2 += w;
        s4 += w * w;
    }
    Ok(s4 / (s2 * s2))
}

/// Mean IPR over the eigenstates of one spectrum.
#[derive(Debug, Clone)]
pub struct AiprResult {
    pub aipr: f64,
    pub per_state_ipr: Vec<f64>,
    pub params: EnsembleParams,
}

pub fn aipr(spectrum: &Spectrum, p: &EnsembleParams) -> Result<AiprResult, EnsembleError> {
    if spectrum.eigenvectors.len() != p.n {
        return Err(EnsembleError::DimensionMismatch {
            expected: p.n,
            got: spectrum.eigenvectors.len(),
        });
    }
    let mut per_state_ipr = Vec::with_capacity(p.n);
    for v in &spectrum.eigenvectors {
        if v.len() != p.n {
            return Err(EnsembleError::DimensionMismatch {
                expected: p.n,
                got: v.len(),
            });
        }
        per_state_ipr.push(ipr(v)?);
    }
    let aipr = per_state_ipr.iter().sum::<f64>() / p.n as f64;
    Ok(AiprResult {
        aipr,
        per_state_ipr,
        params: *p,
    })
}

/// One (c, gamma) node of a sweep.
#[derive(Debug, Clone)]
pub struct SweepNode {
    pub c: f64,
    pub gamma: f64,
    pub aipr_mean: f64,
    /// Sample standard deviation over realizations (zero for a single one).
    pub aipr_stddev: f64,
}

/// Averages AIPR over realizations at every (c, gamma) node.
///
/// Nodes are returned row-major with c outermost. Each node derives its own
/// seed as mix(mix(seed, c_index), gamma_index), and realization r within a
/// node uses substream mix(node_seed, r), so values do not depend on
/// evaluation order.
pub fn sweep(
    c_values: &[f64],
    gamma_values: &[f64],
    n: usize,
    realizations: usize,
    seed: u64,
) -> Result<Vec<SweepNode>, EnsembleError> {
    if c_values.is_empty() || gamma_values.is_empty() {
        return Err(EnsembleError::EmptyGrid);
    }
    if realizations == 0 {
        return Err(EnsembleError::NoRealizations);
    }
    let opts = SolverOptions::default();
    let mut nodes = Vec::with_capacity(c_values.len() * gamma_values.len());
    for (ci, &c) in c_values.iter().enumerate() {
        for (gi, &gamma) in gamma_values.iter().enumerate() {
            let node_seed = mix(mix(seed, ci as u64), gi as u64);
            let mut samples = Vec::with_capacity(realizations);
            for r in 0..realizations {
                let p = EnsembleParams::new(n, c, gamma, node_seed, r as u64)?;
                let h = sample_hamiltonian(&p);
                let s = eigendecompose(&h, &opts)?;
                samples.push(aipr(&s, &p)?.aipr);
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let stddev = if samples.len() < 2 {
                0.0
            } else {
                let ss = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
                (ss / (samples.len() - 1) as f64).sqrt()
            };
            nodes.push(SweepNode {
                c,
                gamma,
                aipr_mean: mean,
                aipr_stddev: stddev,
            });
        }
    }
    Ok(nodes)
}
