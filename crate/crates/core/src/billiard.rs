//! Stadium billiard: boundary geometry, periodic orbits as critical points of
//! the chord-length function, dk* = 4 pi / l quantization, and equidistance
//! statistics of mode sequences.

use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BilliardError {
    #[error("radius and half-length must be positive and finite")]
    BadGeometry,
    #[error("an orbit needs at least 2 bounce points, got {got}")]
    TooFewPoints { got: usize },
    #[error("bounce parameters must be finite")]
    NonFinite,
    #[error("adjacent bounce points {i} and {j} collapse within 1e-8 arclength")]
    DegenerateOrbit { i: usize, j: usize },
    #[error("chord after bounce {i} runs along the boundary (midpoint depth {depth:e})")]
    TangentChord { i: usize, depth: f64 },
    #[error("refinement did not converge in {iters} iterations (gradient norm {grad_norm:e})")]
    Convergence { iters: usize, grad_norm: f64 },
    #[error("singular Jacobian in orbit refinement")]
    SingularJacobian,
    #[error("orbit length must be positive, got {l}")]
    BadLength { l: f64 },
    #[error("mode list must be sorted ascending")]
    Unsorted,
    #[error("equidistance statistics need at least 3 modes, got {got}")]
    TooFewModes { got: usize },
    #[error("reference spacing dk_star must be positive, got {dk}")]
    BadDkStar { dk: f64 },
    #[error("no builtin orbit named {name:?}")]
    UnknownOrbit { name: String },
}

/// Stadium: two straight segments y = +-R for x in [-a, a], capped by
/// semicircles of radius R centered at (-a, 0) and (a, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StadiumGeometry {
    radius: f64,
    half_length: f64,
}

impl StadiumGeometry {
    /// Square-plus-semicircles stadium: half-length equal to the radius.
    pub fn new(radius: f64) -> Result<Self, BilliardError> {
        Self::with_half_length(radius, radius)
    }

    pub fn with_half_length(radius: f64, half_length: f64) -> Result<Self, BilliardError> {
        if !radius.is_finite() || radius <= 0.0 || !half_length.is_finite() || half_length <= 0.0 {
            return Err(BilliardError::BadGeometry);
        }
        Ok(StadiumGeometry {
            radius,
            half_length,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn perimeter(&self) -> f64 {
        4.0 * self.half_length + 2.0 * PI * self.radius
    }

    /// Position and inward unit normal at arclength `s`.
    ///
    /// s = 0 sits at the rightmost point (a + R, 0) and increases
    /// counterclockwise; out-of-range s is reduced modulo the perimeter.
    pub fn boundary_point(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let (pos, tan) = self.position_tangent(s);
        (pos, [-tan[1], tan[0]])
    }

    /// Position and unit tangent (counterclockwise) at arclength `s`.
    pub fn position_tangent(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let a = self.half_length;
        let r = self.radius;
        let p = self.perimeter();
        let mut s = s.rem_euclid(p);
        if !s.is_finite() {
            s = 0.0;
        }
        let q1 = r * FRAC_PI_2;
        let q2 = q1 + 2.0 * a;
        let q3 = q2 + PI * r;
        let q4 = q3 + 2.0 * a;
        if s < q1 {
            let th = s / r;
            ([a + r * th.cos(), r * th.sin()], [-th.sin(), th.cos()])
        } else if s < q2 {
            ([a - (s - q1), r], [-1.0, 0.0])
        } else if s < q3 {
            let th = FRAC_PI_2 + (s - q2) / r;
            ([-a + r * th.cos(), r * th.sin()], [-th.sin(), th.cos()])
        } else if s < q4 {
            ([-a + (s - q3), -r], [1.0, 0.0])
        } else {
            let th = 3.0 * FRAC_PI_2 + (s - q4) / r;
            ([a + r * th.cos(), r * th.sin()], [-th.sin(), th.cos()])
        }
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn depth(&self, p: [f64; 2]) -> f64 {
        let a = self.half_length;
        let x = p[0].clamp(-a, a);
        let d = ((p[0] - x).powi(2) + p[1].powi(2)).sqrt();
        self.radius - d
    }
}

impl Default for StadiumGeometry {
    fn default() -> Self {
        StadiumGeometry {
            radius: 1.0,
            half_length: 1.0,
        }
    }
}

/// One bounce of a periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPoint {
    pub s: f64,
    pub x: f64,
    pub y: f64,
}

/// Closed billiard trajectory satisfying the reflection law at every bounce.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub name: Option<String>,
    pub points: Vec<OrbitPoint>,
    pub length: f64,
    /// Largest reflection-law violation over the bounces.
    pub reflection_residual: f64,
    /// 4 pi / length.
    pub dk_star: f64,
}

/// Named initial guess for `refine_orbit`; `exact` marks orbits constructed
/// directly because Newton cannot handle their marginal (singular) Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSeed {
    pub name: String,
    pub arclengths: Vec<f64>,
    pub exact: bool,
}

/// Equidistance statistics of one mode family against a reference spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitFamilyStats {
    pub mean_dk: f64,
    pub dk_star: f64,
    pub alpha: f64,
    pub sigma: f64,
}

/// Total Euclidean length of the closed polygon through `points`.
pub fn orbit_length(points: &[[f64; 2]]) -> Result<f64, BilliardError> {
    if points.len() < 2 {
        return Err(BilliardError::TooFewPoints { got: points.len() });
    }
    let mut l = 0.0;
    for i in 0..points.len() {
        let p = points[i];
        let q = points[(i + 1) % points.len()];
        l += ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    }
    Ok(l)
}

/// dk* = 4 pi / l.
pub fn dk_star(l: f64) -> Result<f64, BilliardError> {
    if !l.is_finite() || l <= 0.0 {
        return Err(BilliardError::BadLength { l });
    }
    Ok(4.0 * PI / l)
}

/// Gradient of the total chord length with respect to each bounce arclength:
/// g_i = tangent_i . (u_in - u_out). Fails on a collapsed chord.
fn length_gradient(geom: &StadiumGeometry, ss: &[f64]) -> Result<Vec<f64>, BilliardError> {
    let m = ss.len();
    let pts: Vec<([f64; 2], [f64; 2])> = ss.iter().map(|&s| geom.position_tangent(s)).collect();
    let mut g = Vec::with_capacity(m);
    for i in 0..m {
        let (p, t) = pts[i];
        let (prev, _) = pts[(i + m - 1) % m];
        let (next, _) = pts[(i + 1) % m];
        let din = [p[0] - prev[0], p[1] - prev[1]];
        let dout = [next[0] - p[0], next[1] - p[1]];
        let lin = (din[0] * din[0] + din[1] * din[1]).sqrt();
        let lout = (dout[0] * dout[0] + dout[1] * dout[1]).sqrt();
        if lin < 1e-12 || lout < 1e-12 {
            return Err(BilliardError::DegenerateOrbit {
                i: (i + m - 1) % m,
                j: i,
            });
        }
        let u_in = [din[0] / lin, din[1] / lin];
        let u_out = [dout[0] / lout, dout[1] / lout];
        g.push(t[0] * (u_in[0] - u_out[0]) + t[1] * (u_in[1] - u_out[1]));
    }
    Ok(g)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the dense system in place by Gaussian elimination with partial
/// pivoting; the matrix is row-major m x m.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, m: usize) -> Result<Vec<f64>, BilliardError> {
    for col in 0..m {
        let mut piv = col;
        for row in col + 1..m {
            if a[row * m + col].abs() > a[piv * m + col].abs() {
                piv = row;
            }
        }
        if a[piv * m + col].abs() < 1e-300 {
            return Err(BilliardError::SingularJacobian);
        }
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * m + col];
        for row in col + 1..m {
            let f = a[row * m + col] / d;
            if f != 0.0 {
                for k in col..m {
                    a[row * m + k] -= f * a[col * m + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut s = b[row];
        for k in row + 1..m {
            s -= a[row * m + k] * x[k];
        }
        x[row] = s / a[row * m + row];
    }
    Ok(x)
}

const NEWTON_MAX_ITERS: usize = 200;
const GRAD_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-7;
const ARC_DISTINCT_TOL: f64 = 1e-8;
const DEPTH_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;

/// Damped Newton refinement of bounce arclengths to a critical point of the
/// length function.
///
/// Periodic orbits are saddle points of the length, so the damping accepts a
/// trial step when the gradient norm decreases. Converged orbits are
/// validated: adjacent bounces must stay distinct, no chord may run along the
/// boundary, and the reflection residual must not exceed 1e-9.
pub fn refine_orbit(
    initial: &[f64],
    geom: &StadiumGeometry,
) -> Result<PeriodicOrbit, BilliardError> {
    let m = initial.len();
    if m < 2 {
        return Err(BilliardError::TooFewPoints { got: m });
    }
    if initial.iter().any(|s| !s.is_finite()) {
        return Err(BilliardError::NonFinite);
    }
    check_distinct(initial, geom)?;

    let mut ss: Vec<f64> = initial.to_vec();
    let mut g = length_gradient(geom, &ss)?;
    let mut gn = norm2(&g);
    let mut iters = 0usize;
    while gn > GRAD_TOL {
        if iters >= NEWTON_MAX_ITERS {
            return Err(BilliardError::Convergence {
                iters,
                grad_norm: gn,
            });
        }
        iters += 1;
        // Central-difference Jacobian of the gradient.
        let mut jac = vec![0.0; m * m];
        for j in 0..m {
            let mut plus = ss.clone();
            plus[j] += FD_STEP;
            let mut minus = ss.clone();
            minus[j] -= FD_STEP;
            let gp = length_gradient(geom, &plus)?;
            let gm = length_gradient(geom, &minus)?;
            for i in 0..m {
                jac[i * m + j] = (gp[i] - gm[i]) / (2.0 * FD_STEP);
            }
        }
        let step = solve_dense(jac, g.iter().map(|x| -x).collect(), m)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..25 {
            let trial: Vec<f64> = ss
                .iter()
                .zip(&step)
                .map(|(s, d)| s + lambda * d)
                .collect();
            if let Ok(gt) = length_gradient(geom, &trial) {
                let gtn = norm2(&gt);
                if gtn < gn {
                    ss = trial;
                    g = gt;
                    gn = gtn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(BilliardError::Convergence {
                iters,
                grad_norm: gn,
            });
        }
    }

    let p = geom.perimeter();
    let ss: Vec<f64> = ss.iter().map(|s| s.rem_euclid(p)).collect();
    check_distinct(&ss, geom)?;
    let pts: Vec<[f64; 2]> = ss.iter().map(|&s| geom.boundary_point(s).0).collect();
    for i in 0..m {
        let q = pts[(i + 1) % m];
        let mid = [0.5 * (pts[i][0] + q[0]), 0.5 * (pts[i][1] + q[1])];
        let depth = geom.depth(mid);
        if depth <= DEPTH_TOL {
            return Err(BilliardError::TangentChord { i, depth });
        }
    }
    let residual = g.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if residual > RESIDUAL_TOL {
        return Err(BilliardError::Convergence {
            iters,
            grad_norm: gn,
        });
    }
    let length = orbit_length(&pts)?;
    Ok(PeriodicOrbit {
        name: None,
        points: ss
            .iter()
            .zip(&pts)
            .map(|(&s, &[x, y])| OrbitPoint { s, x, y })
            .collect(),
        length,
        reflection_residual: residual,
        dk_star: dk_star(length)?,
    })
}

fn check_distinct(ss: &[f64], geom: &StadiumGeometry) -> Result<(), BilliardError> {
    let p = geom.perimeter();
    let m = ss.len();
    for i in 0..m {
        let j = (i + 1) % m;
        if m == 2 && j <= i {
            break;
        }
        let d = (ss[i] - ss[j]).rem_euclid(p);
        let d = d.min(p - d);
        if d < ARC_DISTINCT_TOL {
            return Err(BilliardError::DegenerateOrbit { i, j });
        }
    }
    Ok(())
}

/// Arclength of the right-cap point at angle `th` in (-pi/2, pi/2).
fn s_right_cap(geom: &StadiumGeometry, th: f64) -> f64 {
    if th >= 0.0 {
        geom.radius * th
    } else {
        geom.perimeter() + geom.radius * th
    }
}

/// Arclength of the left-cap point at angle `ph` in (pi/2, 3 pi/2).
fn s_left_cap(geom: &StadiumGeometry, ph: f64) -> f64 {
    geom.radius * FRAC_PI_2 + 2.0 * geom.half_length + geom.radius * (ph - FRAC_PI_2)
}

/// Arclength of (x, R) on the top straight.
fn s_top(geom: &StadiumGeometry, x: f64) -> f64 {
    geom.radius * FRAC_PI_2 + (geom.half_length - x)
}

/// Arclength of (x, -R) on the bottom straight.
fn s_bottom(geom: &StadiumGeometry, x: f64) -> f64 {
    geom.radius * (FRAC_PI_2 + PI) + 2.0 * geom.half_length + (x + geom.half_length)
}

/// Labeled seeds for the short periodic orbits; refined by `refine_orbit`
/// except the marginal horizontal bouncing ball, which is exact by symmetry.
pub fn builtin_orbits(geom: &StadiumGeometry) -> Vec<OrbitSeed> {
    let a = geom.half_length;
    // Cap-bounce angles; the straight-segment coordinates scale with a.
    let th_triangle = (-(73.0_f64.sqrt() - 1.0) / 12.0).acos();
    let th_arrow = (1.0_f64 / 3.0).acos();
    let th_candy = 1.280129;
    let seed = |name: &str, ss: Vec<f64>, exact: bool| OrbitSeed {
        name: name.to_string(),
        arclengths: ss,
        exact,
    };
    vec![
        seed(
            "HBB",
            vec![s_right_cap(geom, 0.0), s_left_cap(geom, PI)],
            true,
        ),
        seed(
            "rectangle",
            vec![
                s_right_cap(geom, 0.25 * PI),
                s_left_cap(geom, 0.75 * PI),
                s_left_cap(geom, 1.25 * PI),
                s_right_cap(geom, -0.25 * PI),
            ],
            false,
        ),
        seed(
            "diamond",
            vec![
                s_right_cap(geom, 0.0),
                s_top(geom, 0.0),
                s_left_cap(geom, PI),
                s_bottom(geom, 0.0),
            ],
            false,
        ),
        seed(
            "triangle",
            vec![
                s_right_cap(geom, 0.0),
                s_left_cap(geom, th_triangle),
                s_left_cap(geom, 2.0 * PI - th_triangle),
            ],
            false,
        ),
        seed(
            "arrowhead",
            vec![
                s_right_cap(geom, -th_arrow),
                s_left_cap(geom, PI),
                s_right_cap(geom, th_arrow),
                s_right_cap(geom, 0.0),
            ],
            false,
        ),
        seed(
            "fish",
            vec![
                s_right_cap(geom, 0.094172),
                s_left_cap(geom, 2.091135),
                s_left_cap(geom, 3.567759),
                s_bottom(geom, -0.547156 * a),
            ],
            false,
        ),
        seed(
            "bowtie",
            vec![
                s_right_cap(geom, PI / 3.0),
                s_left_cap(geom, 4.0 * PI / 3.0),
                s_left_cap(geom, 2.0 * PI / 3.0),
                s_right_cap(geom, -PI / 3.0),
            ],
            false,
        ),
        seed(
            "candy",
            vec![
                s_left_cap(geom, PI - th_candy),
                s_bottom(geom, 0.0),
                s_right_cap(geom, th_candy),
                s_right_cap(geom, -th_candy),
                s_top(geom, 0.0),
                s_left_cap(geom, PI + th_candy),
            ],
            false,
        ),
    ]
}

/// Finds a builtin seed by full name or single-letter abbreviation
/// (R, A, D, T, F, B, C), case-insensitive.
pub fn builtin_seed(geom: &StadiumGeometry, name: &str) -> Result<OrbitSeed, BilliardError> {
    let want = name.to_ascii_lowercase();
    for seed in builtin_orbits(geom) {
        let full = seed.name.to_ascii_lowercase();
        let initial = &full[..1];
        if want == full || (want.len() == 1 && want == initial && full != "hbb") {
            return Ok(seed);
        }
    }
    Err(BilliardError::UnknownOrbit {
        name: name.to_string(),
    })
}

/// The exact marginal horizontal bouncing-ball orbit.
fn exact_orbit(seed: &OrbitSeed, geom: &StadiumGeometry) -> Result<PeriodicOrbit, BilliardError> {
    let pts: Vec<[f64; 2]> = seed
        .arclengths
        .iter()
        .map(|&s| geom.boundary_point(s).0)
        .collect();
    let g = length_gradient(geom, &seed.arclengths)?;
    let residual = g.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let length = orbit_length(&pts)?;
    Ok(PeriodicOrbit {
        name: Some(seed.name.clone()),
        points: seed
            .arclengths
            .iter()
            .zip(&pts)
            .map(|(&s, &[x, y])| OrbitPoint { s, x, y })
            .collect(),
        length,
        reflection_residual: residual,
        dk_star: dk_star(length)?,
    })
}

/// Turns a seed into a refined, labeled orbit. Marginal seeds bypass the
/// Newton iteration and are constructed exactly.
pub fn realize_seed(seed: &OrbitSeed, geom: &StadiumGeometry) -> Result<PeriodicOrbit, BilliardError> {
    if seed.exact {
        exact_orbit(seed, geom)
    } else {
        let mut o = refine_orbit(&seed.arclengths, geom)?;
        o.name = Some(seed.name.clone());
        Ok(o)
    }
}

/// Refines every builtin seed and returns the labeled orbits in seed order.
pub fn orbit_table(geom: &StadiumGeometry) -> Result<Vec<PeriodicOrbit>, BilliardError> {
    let mut orbits = Vec::new();
    for seed in builtin_orbits(geom) {
        orbits.push(realize_seed(&seed, geom)?);
    }
    Ok(orbits)
}

/// Mean spacing, population standard deviation, and relative offset alpha of
/// a sorted mode sequence against a reference spacing dk_star.
pub fn equidistance_stats(k_reals: &[f64], dk_star: f64) -> Result<OrbitFamilyStats, BilliardError> {
    if k_reals.len() < 3 {
        return Err(BilliardError::TooFewModes { got: k_reals.len() });
    }
    if k_reals.iter().any(|v| !v.is_finite()) {
        return Err(BilliardError::NonFinite);
    }
    if k_reals.windows(2).any(|w| w[1] < w[0]) {
        return Err(BilliardError::Unsorted);
    }
    if !dk_star.is_finite() || dk_star <= 0.0 {
        return Err(BilliardError::BadDkStar { dk: dk_star });
    }
    let diffs: Vec<f64> = k_reals.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64;
    Ok(OrbitFamilyStats {
        mean_dk: mean,
        dk_star,
        alpha: ((mean - dk_star) / dk_star).abs(),
        sigma: var.sqrt(),
    })
}
