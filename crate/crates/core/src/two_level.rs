//! Closed-form 2x2 open two-level model: eigenvalues, eigenstates, the
//! delocalization factor F, exceptional points, EP encircling, and the
//! localization phase map over (d_eps/c, d_gamma/c).

use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TwoLevelError {
    #[error("parameters must be finite")]
    NonFinite,
    #[error("decay rates must be non-negative: gamma1 = {gamma1}, gamma2 = {gamma2}")]
    NegativeGamma { gamma1: f64, gamma2: f64 },
    #[error("scaled variables are undefined at c = 0")]
    ZeroCoupling,
    #[error("state norm {norm} is off unit by more than 1e-9")]
    NotNormalized { norm: f64 },
    #[error("loop comes within {dist:e} of the exceptional point at d_gamma = {d_gamma}")]
    LoopThroughEp { dist: f64, d_gamma: f64 },
    #[error("eigenvalue continuation ambiguous at step {step}; rerun with more steps")]
    AmbiguousContinuation { step: usize },
    #[error("encircling needs at least 16 steps, got {steps}")]
    TooFewSteps { steps: usize },
    #[error("loop center and radius must be finite with radius > 0")]
    BadLoop,
    #[error("grid axes must be non-empty and strictly increasing")]
    BadGrid,
    #[error("threshold F_c must lie strictly inside (0, 1), got {f_c}")]
    BadThreshold { f_c: f64 },
}

/// Parameters (eps1, eps2, gamma1, gamma2, c) of the open two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub eps1: f64,
    pub eps2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c: f64,
}

impl TwoLevelParams {
    pub fn new(
        eps1: f64,
        eps2: f64,
        gamma1: f64,
        gamma2: f64,
        c: f64,
    ) -> Result<Self, TwoLevelError> {
        let p = TwoLevelParams {
            eps1,
            eps2,
            gamma1,
            gamma2,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TwoLevelError> {
        let vals = [self.eps1, self.eps2, self.gamma1, self.gamma2, self.c];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(TwoLevelError::NonFinite);
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(TwoLevelError::NegativeGamma {
                gamma1: self.gamma1,
                gamma2: self.gamma2,
            });
        }
        Ok(())
    }

    pub fn d_eps(&self) -> f64 {
        self.eps2 - self.eps1
    }

    pub fn d_gamma(&self) -> f64 {
        self.gamma2 - self.gamma1
    }

    /// Assembles the matrix [[eps1 - i gamma1, c], [c, eps2 - i gamma2]].
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![
                Complex64::new(self.eps1, -self.gamma1),
                Complex64::new(self.c, 0.0),
            ],
            vec![
                Complex64::new(self.c, 0.0),
                Complex64::new(self.eps2, -self.gamma2),
            ],
        ])
        .expect("2x2 assembly cannot fail for finite params")
    }
}

/// Closed-form eigensystem of the two-level model.
#[derive(Debug, Clone)]
pub struct TwoLevelResult {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// Scaled discriminant; `None` at c = 0 where the scaled variables
    /// do not exist.
    pub discriminant: Option<Complex64>,
    /// Normalized eigenstates, `states[0]` for the + branch.
    pub states: [[Complex64; 2]; 2],
    /// Delocalization factor of each state, same branch order.
    pub f: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Permutation {
    Identity,
    Swap,
}

fn normalize2(top: Complex64) -> [Complex64; 2] {
    let m = top.norm().max(1.0);
    let a = top.scale(1.0 / m);
    let b = 1.0 / m;
    let n = (a.norm_sqr() + b * b).sqrt();
    [a.scale(1.0 / n), Complex64::new(b / n, 0.0)]
}

fn f_of(state: &[Complex64; 2]) -> f64 {
    let m1 = state[0].norm_sqr();
    let m2 = state[1].norm_sqr();
    let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Closed form without the gamma sign checks, so loops in parameter space may
/// continue analytically through gamma2 < 0.
fn closed_form(eps1: f64, eps2: f64, gamma1: f64, gamma2: f64, c: f64) -> TwoLevelResult {
    let de = eps2 - eps1;
    let dg = gamma2 - gamma1;
    let t = Complex64::new(eps1 + eps2, -(gamma1 + gamma2));
    if c != 0.0 {
        let x = de / c;
        let y = dg / c;
        let disc = Complex64::new(x * x - y * y + 4.0, -2.0 * x * y);
        let w = disc.sqrt().scale(c);
        let lambda_plus = (t + w).scale(0.5);
        let lambda_minus = (t - w).scale(0.5);
        let base = Complex64::new(-de, dg);
        let two_c = 2.0 * c;
        let top_plus = (base + w).scale(1.0 / two_c);
        let top_minus = (base - w).scale(1.0 / two_c);
        let states = [normalize2(top_plus), normalize2(top_minus)];
        let f = [f_of(&states[0]), f_of(&states[1])];
        TwoLevelResult {
            lambda_plus,
            lambda_minus,
            discriminant: Some(disc),
            states,
            f,
        }
    } else {
        let d0 = Complex64::new(de, -dg);
        let w = (d0 * d0).sqrt();
        let lambda_plus = (t + w).scale(0.5);
        let lambda_minus = (t - w).scale(0.5);
        let level1 = Complex64::new(eps1, -gamma1);
        let level2 = Complex64::new(eps2, -gamma2);
        let e1: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e2: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let plus_is_level1 = (lambda_plus - level1).norm() <= (lambda_plus - level2).norm();
        let states = if plus_is_level1 { [e1, e2] } else { [e2, e1] };
        TwoLevelResult {
            lambda_plus,
            lambda_minus,
            discriminant: None,
            states,
            f: [0.0, 0.0],
        }
    }
}

/// Eigenvalues, eigenstates, discriminant, and per-branch F.
///
/// lambda_pm = (eps1 + eps2 - i(gamma1 + gamma2) +- c sqrt(disc)) / 2 with the
/// principal square root; the + branch of the result carries the + sign.
pub fn eigenpairs_2x2(p: &TwoLevelParams) -> Result<TwoLevelResult, TwoLevelError> {
    p.validate()?;
    Ok(closed_form(p.eps1, p.eps2, p.gamma1, p.gamma2, p.c))
}

/// Scaled discriminant (d_eps/c)^2 - (d_gamma/c)^2 + 4 - 2i d_eps d_gamma / c^2.
pub fn scaled_discriminant(p: &TwoLevelParams) -> Result<Complex64, TwoLevelError> {
    p.validate()?;
    if p.c == 0.0 {
        return Err(TwoLevelError::ZeroCoupling);
    }
    let x = p.d_eps() / p.c;
    let y = p.d_gamma() / p.c;
    Ok(Complex64::new(x * x - y * y + 4.0, -2.0 * x * y))
}

/// F = (1 - R)/R with R the larger squared component modulus of a
/// unit-norm state; equivalently min/max of the two moduli squared.
pub fn delocalization_factor(state: &[Complex64; 2]) -> Result<f64, TwoLevelError> {
    let norm = (state[0].norm_sqr() + state[1].norm_sqr()).sqrt();
    if !(norm.is_finite()) || (norm - 1.0).abs() > 1e-9 {
        return Err(TwoLevelError::NotNormalized { norm });
    }
    Ok(f_of(state))
}

/// The two exceptional points in the (d_eps, d_gamma) plane: (0, 2c), (0, -2c).
pub fn exceptional_points(c: f64) -> Result<[(f64, f64); 2], TwoLevelError> {
    if !c.is_finite() {
        return Err(TwoLevelError::NonFinite);
    }
    if c == 0.0 {
        return Err(TwoLevelError::ZeroCoupling);
    }
    Ok([(0.0, 2.0 * c), (0.0, -2.0 * c)])
}

/// Tracks both eigenvalues by nearest continuation around a circular loop in
/// the (d_eps, d_gamma) plane and reports the permutation after one circuit.
///
/// The loop varies (eps2, gamma2) at fixed (eps1, gamma1, c); gamma2 may pass
/// through negative values, which is treated as analytic continuation rather
/// than an error.
pub fn encircle_ep(
    center: (f64, f64),
    radius: f64,
    steps: usize,
    p0: &TwoLevelParams,
) -> Result<Permutation, TwoLevelError> {
    p0.validate()?;
    if steps < 16 {
        return Err(TwoLevelError::TooFewSteps { steps });
    }
    if !center.0.is_finite() || !center.1.is_finite() || !radius.is_finite() || radius <= 0.0 {
        return Err(TwoLevelError::BadLoop);
    }
    let c = p0.c;
    if c == 0.0 {
        return Err(TwoLevelError::ZeroCoupling);
    }
    for ep_dg in [2.0 * c, -2.0 * c] {
        let d = (center.0.powi(2) + (center.1 - ep_dg).powi(2)).sqrt();
        if (d - radius).abs() < 1e-6 {
            return Err(TwoLevelError::LoopThroughEp {
                dist: (d - radius).abs(),
                d_gamma: ep_dg,
            });
        }
    }
    let eval = |theta: f64| {
        let de = center.0 + radius * theta.cos();
        let dg = center.1 + radius * theta.sin();
        let r = closed_form(p0.eps1, p0.eps1 + de, p0.gamma1, p0.gamma1 + dg, c);
        (r.lambda_plus, r.lambda_minus)
    };
    let start = eval(0.0);
    let (mut t1, mut t2) = start;
    for k in 1..=steps {
        let (a, b) = if k == steps {
            start
        } else {
            eval(2.0 * std::f64::consts::PI * k as f64 / steps as f64)
        };
        let d_keep = (a - t1).norm() + (b - t2).norm();
        let d_swap = (a - t2).norm() + (b - t1).norm();
        if (d_keep - d_swap).abs() <= 1e-12 {
            return Err(TwoLevelError::AmbiguousContinuation { step: k });
        }
        if d_keep < d_swap {
            t1 = a;
            t2 = b;
        } else {
            t1 = b;
            t2 = a;
        }
    }
    Ok(if t1 == start.0 && t2 == start.1 {
        Permutation::Identity
    } else {
        Permutation::Swap
    })
}

/// Localization phase map on a (d_eps/c, d_gamma/c) grid.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    pub d_eps_over_c: Vec<f64>,
    pub d_gamma_over_c: Vec<f64>,
    /// Row-major over the grid: index = i_eps * n_gamma + i_gamma.
    pub f_values: Vec<f64>,
    /// True where F >= f_c (delocalized).
    pub labels: Vec<bool>,
    pub f_c: f64,
}

impl PhaseMap {
    pub fn value(&self, i_eps: usize, i_gamma: usize) -> f64 {
        self.f_values[i_eps * self.d_gamma_over_c.len() + i_gamma]
    }

    pub fn delocalized(&self, i_eps: usize, i_gamma: usize) -> bool {
        self.labels[i_eps * self.d_gamma_over_c.len() + i_gamma]
    }

    /// Default grid: d_eps/c in [-5, 5], d_gamma/c in [0, 4], 201 x 201.
    pub fn default_axes() -> (Vec<f64>, Vec<f64>) {
        (linspace(-5.0, 5.0, 201), linspace(0.0, 4.0, 201))
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![lo];
    }
    let den = (n - 1) as f64;
    (0..n)
        .map(|i| ((n - 1 - i) as f64 * lo + i as f64 * hi) / den)
        .collect()
}

/// Evaluates max-branch F over the grid, varying (eps2, gamma2) around the
/// anchor's (eps1, gamma1) at fixed coupling; classifies against f_c.
pub fn phase_map(
    d_eps_axis: &[f64],
    d_gamma_axis: &[f64],
    f_c: f64,
    anchor: &TwoLevelParams,
) -> Result<PhaseMap, TwoLevelError> {
    anchor.validate()?;
    if anchor.c == 0.0 {
        return Err(TwoLevelError::ZeroCoupling);
    }
    if !(f_c > 0.0 && f_c < 1.0) {
        return Err(TwoLevelError::BadThreshold { f_c });
    }
    for axis in [d_eps_axis, d_gamma_axis] {
        if axis.is_empty() || axis.iter().any(|v| !v.is_finite()) {
            return Err(TwoLevelError::BadGrid);
        }
        if axis.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TwoLevelError::BadGrid);
        }
    }
    let c = anchor.c;
    let mut f_values = Vec::with_capacity(d_eps_axis.len() * d_gamma_axis.len());
    let mut labels = Vec::with_capacity(f_values.capacity());
    for &x in d_eps_axis {
        for &y in d_gamma_axis {
            let r = closed_form(
                anchor.eps1,
                anchor.eps1 + c * x,
                anchor.gamma1,
                anchor.gamma1 + c * y,
                c,
            );
            let f = r.f[0].max(r.f[1]);
            f_values.push(f);
            labels.push(f >= f_c);
        }
    }
    Ok(PhaseMap {
        d_eps_over_c: d_eps_axis.to_vec(),
        d_gamma_over_c: d_gamma_axis.to_vec(),
        f_values,
        labels,
        f_c,
    })
}
