//! Dense complex eigensolver: balancing, Householder reduction to Hessenberg
//! form, implicitly shifted QR iteration, and eigenvectors by back-substitution.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("{len} entries do not fill a {n} x {n} matrix")]
    Dimension { n: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("vector length {len} does not match matrix dimension {n}")]
    VectorMismatch { n: usize, len: usize },
    #[error("eigenvector must be nonzero")]
    ZeroVector,
    #[error(
        "QR iteration did not converge after {sweeps} sweeps; \
         unconverged block rows {lo}..={hi}"
    )]
    Convergence { sweeps: usize, lo: usize, hi: usize },
    #[error("eigenpair {index} residual {residual:e} exceeds bound {bound:e}")]
    ResidualBound {
        index: usize,
        residual: f64,
        bound: f64,
    },
}

/// Dense square complex matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    a: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds an `n` x `n` matrix from column-major entries.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(LinalgError::Dimension {
                n,
                len: entries.len(),
            });
        }
        let m = ComplexMatrix { n, a: entries };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::Dimension {
                    n,
                    len: n * row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                a[i + j * n] = v;
            }
        }
        let m = ComplexMatrix { n, a };
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(n: usize) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        Ok(ComplexMatrix {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.a[i + i * n] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i + j * self.n]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i + j * self.n] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.a
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conjugate_transpose(&self) -> ComplexMatrix {
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for i in 0..n {
                a[j + i * n] = self.a[i + j * n].conj();
            }
        }
        ComplexMatrix { n, a }
    }

    /// Matrix-vector product `M x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.n;
        if x.len() != n {
            return Err(LinalgError::VectorMismatch { n, len: x.len() });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (j, &xj) in x.iter().enumerate() {
            if xj != Complex64::new(0.0, 0.0) {
                let col = &self.a[j * n..(j + 1) * n];
                for (yi, &cij) in y.iter_mut().zip(col) {
                    *yi += cij * xj;
                }
            }
        }
        Ok(y)
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        for j in 0..self.n {
            for i in 0..self.n {
                let z = self.a[i + j * self.n];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Tuning knobs for [`eigendecompose`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Residual bound checked per eigenpair when eigenvectors are computed.
    pub tol_res: f64,
    /// QR sweep budget as a multiple of the matrix dimension.
    pub max_sweep_factor: usize,
    pub compute_eigenvectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_res: 1e-10,
            max_sweep_factor: 30,
            compute_eigenvectors: true,
        }
    }
}

/// Full eigendecomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues sorted by real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm right eigenvectors, one per eigenvalue; empty when skipped.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Per-pair residuals `||M v - lambda v|| / ||v||`; empty when skipped.
    pub residuals: Vec<f64>,
    /// Total QR sweeps spent.
    pub iterations: usize,
    /// Set when the smallest eigenvalue gap is below `1e-8 * ||M||_F`,
    /// where eigenvector directions stop being trustworthy.
    pub ill_conditioned: bool,
}

const DEFLATE_TOL: f64 = 1e-14;

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

#[inline]
fn chypot(x: Complex64, y: Complex64) -> f64 {
    let ax = x.norm();
    let ay = y.norm();
    let m = ax.max(ay);
    if m == 0.0 {
        0.0
    } else {
        m * ((ax / m).powi(2) + (ay / m).powi(2)).sqrt()
    }
}

/// Parlett-Reinsch balancing by powers of two; returns per-row scale factors.
fn balance(a: &mut [Complex64], n: usize) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let b2 = RADIX * RADIX;
    let mut scale = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for k in 0..n {
                if k != i {
                    c += cabs1(a[k + i * n]);
                    r += cabs1(a[i + k * n]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= b2;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= b2;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for k in 0..n {
                    a[i + k * n] = a[i + k * n].scale(inv);
                }
                for k in 0..n {
                    a[k + i * n] = a[k + i * n].scale(f);
                }
            }
        }
        if done {
            return scale;
        }
    }
}

/// Householder reduction to upper Hessenberg form; accumulates the
/// transformation in `q` when provided.
fn hessenberg(a: &mut [Complex64], n: usize, q: Option<&mut [Complex64]>) {
    if n < 3 {
        if let Some(q) = q {
            set_identity(q, n);
        }
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    // Reflector k zeroes column k below the subdiagonal: P = I - tau w w^H.
    let mut taus = vec![0.0_f64; n - 2];
    let mut ws: Vec<Vec<Complex64>> = Vec::with_capacity(n - 2);
    let mut t = vec![zero; n];
    for k in 0..n - 2 {
        let m = n - k - 1; // length of the column tail being reflected
        let mut w = vec![zero; m];
        let xnorm = {
            let mut s = 0.0;
            for i in 0..m {
                s += a[(k + 1 + i) + k * n].norm_sqr();
            }
            s.sqrt()
        };
        let tail_small = (1..m).all(|i| a[(k + 1 + i) + k * n] == zero);
        if xnorm == 0.0 || tail_small {
            taus[k] = 0.0;
            ws.push(w);
            continue;
        }
        let alpha = a[(k + 1) + k * n];
        let phase = if alpha == zero {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        w[0] = alpha - beta;
        for i in 1..m {
            w[i] = a[(k + 1 + i) + k * n];
        }
        let wnorm2 = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let tau = 2.0 / wnorm2;
        a[(k + 1) + k * n] = beta;
        for i in 1..m {
            a[(k + 1 + i) + k * n] = zero;
        }
        // Left: col_j -= tau (w^H col_j) w for columns k+1..n.
        for j in k + 1..n {
            let col = &mut a[j * n..(j + 1) * n];
            let mut sigma = zero;
            for i in 0..m {
                sigma += w[i].conj() * col[k + 1 + i];
            }
            sigma *= tau;
            for i in 0..m {
                col[k + 1 + i] -= sigma * w[i];
            }
        }
        // Right: t = A[:, k+1..n] w, then col_{k+1+j} -= t * tau conj(w_j).
        t[..n].fill(zero);
        for j in 0..m {
            let wj = w[j];
            if wj != zero {
                let col = &a[(k + 1 + j) * n..(k + 2 + j) * n];
                for i in 0..n {
                    t[i] += col[i] * wj;
                }
            }
        }
        for j in 0..m {
            let f = Complex64::new(tau, 0.0) * w[j].conj();
            if f != zero {
                let col = &mut a[(k + 1 + j) * n..(k + 2 + j) * n];
                for i in 0..n {
                    col[i] -= t[i] * f;
                }
            }
        }
        taus[k] = tau;
        ws.push(w);
    }
    if let Some(q) = q {
        set_identity(q, n);
        // Q = P_0 P_1 ... applied to I from the innermost reflector out.
        for k in (0..n - 2).rev() {
            let tau = taus[k];
            if tau == 0.0 {
                continue;
            }
            let w = &ws[k];
            let m = n - k - 1;
            for j in k + 1..n {
                let col = &mut q[j * n..(j + 1) * n];
                let mut sigma = zero;
                for i in 0..m {
                    sigma += w[i].conj() * col[k + 1 + i];
                }
                sigma *= tau;
                for i in 0..m {
                    col[k + 1 + i] -= sigma * w[i];
                }
            }
        }
    }
}

fn set_identity(q: &mut [Complex64], n: usize) {
    q.fill(Complex64::new(0.0, 0.0));
    for i in 0..n {
        q[i + i * n] = Complex64::new(1.0, 0.0);
    }
}

/// Complex Givens rotation: returns (c, s) with c real such that
/// `[c s; -conj(s) c] [x; y] = [r; 0]`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    if y == zero {
        return (1.0, zero, x);
    }
    if x == zero {
        let ay = y.norm();
        return (0.0, y.conj() / ay, Complex64::new(ay, 0.0));
    }
    let ax = x.norm();
    let r = chypot(x, y);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s, x * (r / ax))
}

struct Qr<'a> {
    h: &'a mut [Complex64],
    z: &'a mut [Complex64],
    n: usize,
    fnorm: f64,
    want_z: bool,
}

impl Qr<'_> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.h[i + j * self.n]
    }

    fn subdiag_negligible(&self, m: usize) -> bool {
        let mut s = cabs1(self.at(m - 1, m - 1)) + cabs1(self.at(m, m));
        if s == 0.0 {
            s = self.fnorm;
        }
        cabs1(self.at(m, m - 1)) <= DEFLATE_TOL * s
    }

    /// Applies the left rotation to rows k,k+1 over columns j0..n and the
    /// right rotation to columns k,k+1 over rows 0..=imax, mirroring the
    /// column update on z.
    fn rotate(&mut self, k: usize, c: f64, s: Complex64, j0: usize, imax: usize) {
        let n = self.n;
        let sc = s.conj();
        for j in j0..n {
            let t1 = self.h[k + j * n];
            let t2 = self.h[k + 1 + j * n];
            self.h[k + j * n] = t1.scale(c) + s * t2;
            self.h[k + 1 + j * n] = t2.scale(c) - sc * t1;
        }
        let (ck, ck1) = col_pair(self.h, n, k);
        for i in 0..=imax {
            let t1 = ck[i];
            let t2 = ck1[i];
            ck[i] = t1.scale(c) + sc * t2;
            ck1[i] = t2.scale(c) - s * t1;
        }
        if self.want_z {
            let (zk, zk1) = col_pair(self.z, n, k);
            for i in 0..n {
                let t1 = zk[i];
                let t2 = zk1[i];
                zk[i] = t1.scale(c) + sc * t2;
                zk1[i] = t2.scale(c) - s * t1;
            }
        }
    }

    /// One implicit single-shift QR sweep on the active block lo..=hi.
    fn sweep(&mut self, lo: usize, hi: usize, mu: Complex64) {
        let n = self.n;
        let mut x = self.at(lo, lo) - mu;
        let mut y = self.at(lo + 1, lo);
        for k in lo..hi {
            if k > lo {
                x = self.at(k, k - 1);
                y = self.at(k + 1, k - 1);
            }
            let (c, s, r) = givens(x, y);
            if k > lo {
                self.h[k + (k - 1) * n] = r;
                self.h[k + 1 + (k - 1) * n] = Complex64::new(0.0, 0.0);
            }
            let imax = (k + 2).min(hi);
            self.rotate(k, c, s, k, imax);
        }
    }

    /// Solves the trailing 2x2 block at rows p,p+1 directly and
    /// triangularizes it with one unitary similarity.
    fn solve_block2(&mut self, p: usize) {
        let n = self.n;
        let a = self.at(p, p);
        let b = self.at(p, p + 1);
        let c = self.at(p + 1, p);
        let d = self.at(p + 1, p + 1);
        let m = (a + d).scale(0.5);
        let q = ((a - d).scale(0.5).powi(2) + b * c).sqrt();
        let l1 = if cabs1(m + q) >= cabs1(m - q) { m + q } else { m - q };
        let l2 = (a + d) - l1;
        // Unitary with first column along the l1 eigenvector of the block.
        let v_top = [b, l1 - a];
        let v_bot = [l1 - d, c];
        let nt = chypot(v_top[0], v_top[1]);
        let nb = chypot(v_bot[0], v_bot[1]);
        let (v, nv) = if nt >= nb { (v_top, nt) } else { (v_bot, nb) };
        if nv > 0.0 {
            let u0 = v[0].scale(1.0 / nv);
            let u1 = v[1].scale(1.0 / nv);
            // Similarity by U = [u0 -conj(u1); u1 conj(u0)] on rows/cols p,p+1.
            for j in p..n {
                let t1 = self.h[p + j * n];
                let t2 = self.h[p + 1 + j * n];
                self.h[p + j * n] = u0.conj() * t1 + u1.conj() * t2;
                self.h[p + 1 + j * n] = u0 * t2 - u1 * t1;
            }
            let (cp, cp1) = col_pair(self.h, n, p);
            for i in 0..=p + 1 {
                let t1 = cp[i];
                let t2 = cp1[i];
                cp[i] = t1 * u0 + t2 * u1;
                cp1[i] = t2 * u0.conj() - t1 * u1.conj();
            }
            if self.want_z {
                let (zp, zp1) = col_pair(self.z, n, p);
                for i in 0..n {
                    let t1 = zp[i];
                    let t2 = zp1[i];
                    zp[i] = t1 * u0 + t2 * u1;
                    zp1[i] = t2 * u0.conj() - t1 * u1.conj();
                }
            }
        }
        self.h[p + p * n] = l1;
        self.h[p + 1 + (p + 1) * n] = l2;
        self.h[p + 1 + p * n] = Complex64::new(0.0, 0.0);
    }
}

/// Splits borrows of two distinct columns k and k+1.
fn col_pair(a: &mut [Complex64], n: usize, k: usize) -> (&mut [Complex64], &mut [Complex64]) {
    let (left, right) = a.split_at_mut((k + 1) * n);
    (&mut left[k * n..], &mut right[..n])
}

fn wilkinson_shift(h: &Qr, hi: usize) -> Complex64 {
    let a = h.at(hi - 1, hi - 1);
    let b = h.at(hi - 1, hi);
    let c = h.at(hi, hi - 1);
    let d = h.at(hi, hi);
    let m = (a + d).scale(0.5);
    let q = ((a - d).scale(0.5).powi(2) + b * c).sqrt();
    if cabs1(m + q - d) <= cabs1(m - q - d) {
        m + q
    } else {
        m - q
    }
}

/// Computes eigenvalues (and optionally right eigenvectors) of a general
/// complex matrix by balanced Hessenberg-QR iteration.
///
/// Eigenvalues are sorted by real part (ties by imaginary part) and the
/// eigenvector columns track the sort. Residuals are measured against the
/// original input matrix.
pub fn eigendecompose(m: &ComplexMatrix, opts: &SolverOptions) -> Result<Spectrum, LinalgError> {
    m.check_finite()?;
    let n = m.n;
    let zero = Complex64::new(0.0, 0.0);
    if n == 1 {
        let lam = m.get(0, 0);
        return Ok(Spectrum {
            eigenvalues: vec![lam],
            eigenvectors: if opts.compute_eigenvectors {
                vec![vec![Complex64::new(1.0, 0.0)]]
            } else {
                Vec::new()
            },
            residuals: if opts.compute_eigenvectors { vec![0.0] } else { Vec::new() },
            iterations: 0,
            ill_conditioned: false,
        });
    }

    let want_z = opts.compute_eigenvectors;
    let mut h = m.a.clone();
    let scale = balance(&mut h, n);
    let mut z = vec![zero; if want_z { n * n } else { 0 }];
    hessenberg(&mut h, n, if want_z { Some(&mut z) } else { None });

    let fnorm = h.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut qr = Qr {
        h: &mut h,
        z: &mut z,
        n,
        fnorm: if fnorm > 0.0 { fnorm } else { 1.0 },
        want_z,
    };

    let max_sweeps = opts.max_sweep_factor.max(1) * n;
    let mut sweeps = 0usize;
    let mut stall = 0usize;
    let mut hi = n - 1;
    loop {
        // Deflate converged trailing eigenvalues and find the active block.
        let mut lo = 0;
        for mm in (1..=hi).rev() {
            if qr.subdiag_negligible(mm) {
                qr.h[mm + (mm - 1) * n] = zero;
                lo = mm;
                break;
            }
        }
        if lo == hi {
            if hi <= 1 {
                break;
            }
            hi -= 1;
            stall = 0;
            continue;
        }
        if lo + 1 == hi {
            qr.solve_block2(lo);
            if hi <= 2 {
                break;
            }
            hi -= 2;
            stall = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(LinalgError::Convergence { sweeps, lo, hi });
        }
        let mu = if stall > 0 && stall.is_multiple_of(10) {
            qr.at(hi, hi) + Complex64::new(0.75 * qr.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(&qr, hi)
        };
        qr.sweep(lo, hi, mu);
        sweeps += 1;
        stall += 1;
    }

    let mut eigenvalues: Vec<Complex64> = (0..n).map(|i| h[i + i * n]).collect();

    let mut eigenvectors: Vec<Vec<Complex64>> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    if opts.compute_eigenvectors {
        let smin = f64::EPSILON * fnorm.max(f64::MIN_POSITIVE);
        let smin = smin.max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lam = eigenvalues[i];
            // Back-substitution on (T - lam I) x = 0 with x[i] = 1.
            let mut x = vec![zero; n];
            x[i] = Complex64::new(1.0, 0.0);
            for j in (0..i).rev() {
                let mut rhs = zero;
                for k in j + 1..=i {
                    rhs += h[j + k * n] * x[k];
                }
                let mut d = h[j + j * n] - lam;
                if cabs1(d) < smin {
                    d = Complex64::new(smin, 0.0);
                }
                x[j] = -rhs / d;
                if x[j].norm() > 1e150 {
                    let inv = 1.0 / x[j].norm();
                    for v in x[j..=i].iter_mut() {
                        *v = v.scale(inv);
                    }
                }
            }
            // v = Z x, then undo balancing and normalize.
            let mut v = vec![zero; n];
            for (k, &xk) in x.iter().enumerate().take(i + 1) {
                if xk != zero {
                    let col = &z[k * n..(k + 1) * n];
                    for r in 0..n {
                        v[r] += col[r] * xk;
                    }
                }
            }
            for (r, val) in v.iter_mut().enumerate() {
                *val = val.scale(scale[r]);
            }
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                return Err(LinalgError::ZeroVector);
            }
            for val in v.iter_mut() {
                *val = val.scale(1.0 / vnorm);
            }
            let r = residual(m, &v, lam)?;
            residuals.push(r);
            eigenvectors.push(v);
        }
        let bound = opts.tol_res * m.frobenius_norm();
        if let Some((index, &r)) = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
        {
            if r > bound {
                return Err(LinalgError::ResidualBound {
                    index,
                    residual: r,
                    bound,
                });
            }
        }
    }

    // Sort eigenpairs by real part, ties by imaginary part.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eigenvalues[i]
            .re
            .total_cmp(&eigenvalues[j].re)
            .then(eigenvalues[i].im.total_cmp(&eigenvalues[j].im))
    });
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    if opts.compute_eigenvectors {
        eigenvectors = order.iter().map(|&i| eigenvectors[i].clone()).collect();
        residuals = order.iter().map(|&i| residuals[i]).collect();
    }

    let mnorm = m.frobenius_norm();
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    let ill_conditioned = n > 1 && min_gap < 1e-8 * mnorm.max(f64::MIN_POSITIVE);

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations: sweeps,
        ill_conditioned,
    })
}

/// Relative residual `||M v - lambda v||_2 / ||v||_2`.
pub fn residual(m: &ComplexMatrix, v: &[Complex64], lambda: Complex64) -> Result<f64, LinalgError> {
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    let mv = m.mul_vec(v)?;
    let mut s = 0.0;
    for i in 0..v.len() {
        s += (mv[i] - lambda * v[i]).norm_sqr();
    }
    Ok(s.sqrt() / vnorm)
}
