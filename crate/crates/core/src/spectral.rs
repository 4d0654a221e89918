//! Dense complex matrices, singular values, trace and operator norms.
//!
//! Singular values come from a column-pivoted Householder QR followed by
//! one-sided Jacobi on the retained rows of `R`. The QR step drops a trailing
//! block only when its Frobenius norm times the square root of its rank bound
//! is below `max(tol, k eps ||M||_F)` with `k = min(rows, cols)`, so the
//! dropped trace norm stays within the `tol * k` accuracy contract whenever
//! `eps ||M||_F <= tol`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 60;

/// Below this size the operator norm is read off the full spectrum.
const DENSE_OPNORM_LIMIT: usize = 48;

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = (0..self.cols.min(8))
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// The rank-one matrix `xi * eta^H`.
    pub fn outer(xi: &[Complex64], eta: &[Complex64]) -> Self {
        Self::from_fn(xi.len(), eta.len(), |i, j| xi[i] * eta[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `M^H y`.
    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &CMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(k) => Err(Error::NonFinite {
                row: k / self.cols,
                col: k % self.cols,
            }),
            None => Ok(()),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub residual: f64,
}

impl SingularSpectrum {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// `M = U diag(sigma) V^H` with `U` of size rows x k and `V` of size cols x k.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
    pub residual: f64,
}

pub(crate) trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn scale(self, r: f64) -> Self;
    fn from_c(z: Complex64) -> Self;
    fn to_c(self) -> Complex64;
    /// `self / |self|`, or 1 for zero.
    fn phase(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn from_c(z: Complex64) -> Self {
        z.re
    }
    fn to_c(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn from_c(z: Complex64) -> Self {
        z
    }
    fn to_c(self) -> Complex64 {
        self
    }
    fn phase(self) -> Self {
        let r = self.norm();
        if r == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            self / r
        }
    }
}

/// Column-major working storage.
struct Cols<S> {
    m: usize,
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> Cols<S> {
    fn from_matrix(a: &CMatrix, adjoint: bool) -> Self {
        let (m, n) = if adjoint { (a.cols, a.rows) } else { (a.rows, a.cols) };
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            for i in 0..m {
                let z = if adjoint { a[(j, i)].conj() } else { a[(i, j)] };
                data.push(S::from_c(z));
            }
        }
        Self { m, n, data }
    }

    fn identity(n: usize) -> Self {
        let mut data = vec![S::zero(); n * n];
        for j in 0..n {
            data[j * n + j] = S::from_c(Complex64::new(1.0, 0.0));
        }
        Self { m: n, n, data }
    }

    fn col(&self, j: usize) -> &[S] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    fn col_mut(&mut self, j: usize) -> &mut [S] {
        &mut self.data[j * self.m..(j + 1) * self.m]
    }

    fn two_cols_mut(&mut self, p: usize, q: usize) -> (&mut [S], &mut [S]) {
        debug_assert!(p < q);
        let m = self.m;
        let (lo, hi) = self.data.split_at_mut(q * m);
        (&mut lo[p * m..(p + 1) * m], &mut hi[..m])
    }

    fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.m, self.n, |i, j| self.data[j * self.m + i].to_c())
    }
}

fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    let mut acc = S::zero();
    for (&a, &b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

fn norm2<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|&a| a.abs2()).sum()
}

/// One-sided Jacobi: orthogonalizes the columns of `a`, accumulating the
/// rotations into `v` when given. Returns the final relative off-diagonal.
fn one_sided_jacobi<S: Scalar>(a: &mut Cols<S>, mut v: Option<&mut Cols<S>>) -> Result<f64> {
    let n = a.n;
    let thresh = (a.m.max(1) as f64) * f64::EPSILON;
    let mut norms = vec![0.0; n];
    let mut last_residual = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = norm2(a.col(j));
        }
        let scale = norms.iter().cloned().fold(0.0, f64::max);
        let floor = scale * f64::EPSILON * f64::EPSILON;
        let mut rotated = false;
        let mut residual: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let (cp, cq) = a.two_cols_mut(p, q);
                let gamma = dot(cp, cq);
                let g = gamma.abs2().sqrt();
                let rel = g / (alpha * beta).sqrt();
                if rel <= thresh {
                    residual = residual.max(rel);
                    continue;
                }
                rotated = true;
                let e = gamma.phase();
                let ec = e.conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, ec, c, s);
                if let Some(vm) = v.as_deref_mut() {
                    let (vp, vq) = vm.two_cols_mut(p, q);
                    rotate(vp, vq, ec, c, s);
                }
                norms[p] = alpha - t * g;
                norms[q] = beta + t * g;
            }
        }
        last_residual = residual;
        if !rotated {
            return Ok(residual);
        }
    }
    Err(Error::NoConvergence {
        what: "one-sided Jacobi",
        iterations: MAX_SWEEPS,
        residual: last_residual,
    })
}

#[inline]
fn rotate<S: Scalar>(cp: &mut [S], cq: &mut [S], ec: S, c: f64, s: f64) {
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y * ec;
        *x = xp.scale(c) - yq.scale(s);
        *y = xp.scale(s) + yq.scale(c);
    }
}

/// Householder QR with column pivoting, stopped once the trailing block is
/// negligible. Returns the leading `k` rows of `R` as row vectors.
fn pivoted_qr_rows<S: Scalar>(a: &mut Cols<S>, drop_tol: f64) -> Vec<Vec<S>> {
    let (m, n) = (a.m, a.n);
    let steps = m.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut norms = vec![0.0; n];
    let mut k = 0;
    while k < steps {
        let mut rem = 0.0;
        for c in k..n {
            norms[c] = norm2(&a.col(c)[k..]);
            rem += norms[c];
        }
        if ((steps - k) as f64).sqrt() * rem.sqrt() <= drop_tol {
            break;
        }
        let p = (k..n).fold(k, |best, c| if norms[c] > norms[best] { c } else { best });
        if p != k {
            let (lo, hi) = a.two_cols_mut(k, p);
            lo.swap_with_slice(hi);
            order.swap(k, p);
            norms.swap(k, p);
        }
        let xnorm = norms[k].sqrt();
        let x0 = a.col(k)[k];
        let alpha = -(x0.phase().scale(xnorm));
        let mut v: Vec<S> = a.col(k)[k..].to_vec();
        v[0] -= alpha;
        let vn = norm2(&v);
        if vn > 0.0 {
            let f = 2.0 / vn;
            for c in k + 1..n {
                let col = &mut a.col_mut(c)[k..];
                let w = dot(&v, col).scale(f);
                for (ci, &vi) in col.iter_mut().zip(&v) {
                    *ci -= vi * w;
                }
            }
        }
        let col = a.col_mut(k);
        col[k] = alpha;
        for x in col[k + 1..].iter_mut() {
            *x = S::zero();
        }
        k += 1;
    }
    (0..k)
        .map(|i| (0..n).map(|c| a.col(c)[i]).collect())
        .collect()
}

fn spectrum_of<S: Scalar>(m: &CMatrix, tol: f64) -> Result<SingularSpectrum> {
    let adjoint = m.rows < m.cols;
    let mut a: Cols<S> = Cols::from_matrix(m, adjoint);
    let full = a.n;
    // Entries carry rounding noise of order eps * ||M||_F; no rank decision below that.
    let noise = full as f64 * f64::EPSILON * m.frobenius_norm();
    let rows = pivoted_qr_rows(&mut a, tol.max(noise));
    let k = rows.len();
    let mut values = Vec::with_capacity(full);
    let mut residual = 0.0;
    if k > 0 {
        // Columns of R^H are the conjugated rows of R.
        let mut b = Cols {
            m: full,
            n: k,
            data: rows.iter().flat_map(|r| r.iter().map(|&x| x.conj())).collect(),
        };
        residual = one_sided_jacobi(&mut b, None)?;
        for j in 0..k {
            values.push(norm2(b.col(j)).sqrt());
        }
    }
    values.resize(full, 0.0);
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(SingularSpectrum { values, residual })
}

fn validate(m: &CMatrix, tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    m.check_finite()
}

pub fn singular_values(m: &CMatrix, tol: f64) -> Result<SingularSpectrum> {
    validate(m, tol)?;
    if m.is_real() {
        spectrum_of::<f64>(m, tol)
    } else {
        spectrum_of::<Complex64>(m, tol)
    }
}

pub fn trace_norm(m: &CMatrix, tol: f64) -> Result<f64> {
    Ok(singular_values(m, tol)?.sum())
}

/// Full singular value decomposition by one-sided Jacobi.
pub fn svd(m: &CMatrix, tol: f64) -> Result<Svd> {
    validate(m, tol)?;
    let adjoint = m.rows < m.cols;
    let mut a: Cols<Complex64> = Cols::from_matrix(m, adjoint);
    let mut v = Cols::identity(a.n);
    let residual = one_sided_jacobi(&mut a, Some(&mut v))?;
    let k = a.n;
    let mut idx: Vec<usize> = (0..k).collect();
    let sig: Vec<f64> = (0..k).map(|j| norm2(a.col(j)).sqrt()).collect();
    idx.sort_by(|&x, &y| sig[y].partial_cmp(&sig[x]).unwrap());
    let mut left = Cols {
        m: a.m,
        n: k,
        data: Vec::with_capacity(a.m * k),
    };
    let mut right = Cols {
        m: v.m,
        n: k,
        data: Vec::with_capacity(v.m * k),
    };
    let mut sigma = Vec::with_capacity(k);
    for &j in &idx {
        let s = sig[j];
        sigma.push(s);
        let inv = if s > 0.0 { 1.0 / s } else { 0.0 };
        left.data.extend(a.col(j).iter().map(|&x| x * inv));
        right.data.extend_from_slice(v.col(j));
    }
    let (u, vv) = if adjoint {
        (right.to_matrix(), left.to_matrix())
    } else {
        (left.to_matrix(), right.to_matrix())
    };
    Ok(Svd {
        u,
        sigma,
        v: vv,
        residual,
    })
}

/// Largest singular value. Small matrices use the full spectrum; larger ones
/// run Lanczos on the smaller Gram matrix with full reorthogonalization until
/// the Ritz residual certifies `tol`.
pub fn operator_norm(m: &CMatrix, tol: f64) -> Result<f64> {
    validate(m, tol)?;
    if m.rows.min(m.cols) <= DENSE_OPNORM_LIMIT {
        return Ok(singular_values(m, tol)?.largest());
    }
    let use_cols = m.cols <= m.rows;
    let dim = if use_cols { m.cols } else { m.rows };
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        if use_cols {
            m.adjoint_matvec(&m.matvec(x))
        } else {
            m.matvec(&m.adjoint_matvec(x))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e_55ed);
    let mut q: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let qn = norm2(&q).sqrt();
    q.iter_mut().for_each(|x| *x /= qn);

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut resid = f64::INFINITY;
    for step in 0..dim {
        let mut w = apply(&q);
        let a = dot(&q, &w).re;
        for (x, &qi) in w.iter_mut().zip(&q) {
            *x -= qi * a;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            for (x, &p) in w.iter_mut().zip(prev.iter()) {
                *x -= p * b;
            }
        }
        basis.push(q);
        alphas.push(a);
        for _ in 0..2 {
            for bvec in &basis {
                let h = dot(bvec, &w);
                for (x, &bv) in w.iter_mut().zip(bvec) {
                    *x -= bv * h;
                }
            }
        }
        let beta = norm2(&w).sqrt();
        let theta = largest_tridiagonal_eigenvalue(&alphas, &betas);
        let last = last_eigvec_component(&alphas, &betas, theta);
        resid = beta * last.abs();
        let sigma = theta.max(0.0).sqrt();
        let sigma_err = if sigma > 0.0 { resid / (2.0 * sigma) } else { resid.sqrt() };
        let breakdown = beta <= f64::EPSILON * theta.abs().max(f64::MIN_POSITIVE) * 10.0;
        if sigma_err <= tol || breakdown || step + 1 == dim {
            return Ok(sigma);
        }
        q = w.iter().map(|&x| x / beta).collect();
        betas.push(beta);
    }
    Err(Error::NoConvergence {
        what: "Lanczos operator norm",
        iterations: dim,
        residual: resid,
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alphas.len() {
        let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
        d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (alphas[i].abs() + x.abs() + 1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_tridiagonal_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { betas[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alphas, betas, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Last component of the unit eigenvector for `theta`, by inverse iteration
/// with a pivoted tridiagonal solve.
fn last_eigvec_component(alphas: &[f64], betas: &[f64], theta: f64) -> f64 {
    let n = alphas.len();
    if n == 1 {
        return 1.0;
    }
    let scale = alphas.iter().map(|a| a.abs()).fold(0.0, f64::max)
        + betas.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let shift = theta + scale.max(1e-300) * 1e-13;
    let mut y = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        y = solve_tridiagonal(alphas, betas, shift, &y);
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return 1.0;
        }
        y.iter_mut().for_each(|v| *v /= nrm);
    }
    y[n - 1]
}

/// Solves `(T - shift I) x = rhs` by Gaussian elimination with partial pivoting.
fn solve_tridiagonal(alphas: &[f64], betas: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = alphas.len();
    let mut d: Vec<f64> = alphas.iter().map(|a| a - shift).collect();
    let mut du: Vec<f64> = betas.to_vec();
    let mut dl: Vec<f64> = betas.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = f64::EPSILON;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::EPSILON;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_values() {
        let s = singular_values(&CMatrix::identity(2), DEFAULT_TOL).unwrap();
        assert_eq!(s.values.len(), 2);
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_norm(&CMatrix::identity(3), DEFAULT_TOL).unwrap(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_values() {
        let xi = [c(2.0, 0.0), c(0.0, 0.0)];
        let eta = [c(0.0, 3.0), c(0.0, 0.0)];
        let s = singular_values(&CMatrix::outer(&xi, &eta), DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(s.values[0], 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(s.values[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn diagonal_trace_norm() {
        let m = CMatrix::diag(&[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)]);
        assert_abs_diff_eq!(trace_norm(&m, DEFAULT_TOL).unwrap(), 6.0, epsilon = 1e-13);
    }

    #[test]
    fn all_ones_operator_norm() {
        let m = CMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0));
        assert_abs_diff_eq!(operator_norm(&m, DEFAULT_TOL).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = CMatrix::identity(2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(singular_values(&m, 1e-12), Err(Error::NonFinite { row: 1, col: 0 })));
        assert!(singular_values(&CMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn rectangular_counts() {
        let m = CMatrix::from_fn(2, 5, |i, j| c((i + j) as f64, (i * j) as f64));
        assert_eq!(singular_values(&m, 1e-12).unwrap().values.len(), 2);
        assert_eq!(singular_values(&m.adjoint(), 1e-12).unwrap().values.len(), 2);
    }

    #[test]
    fn svd_reconstructs() {
        let m = CMatrix::from_fn(5, 3, |i, j| c((i as f64 + 1.0).sin() * j as f64, (i * j) as f64 * 0.3 - 1.0));
        let d = svd(&m, 1e-12).unwrap();
        let sig = CMatrix::diag(&d.sigma.iter().map(|&s| c(s, 0.0)).collect::<Vec<_>>());
        let back = d.u.matmul(&sig).unwrap().matmul(&d.v.adjoint()).unwrap();
        assert!(back.sub(&m).unwrap().max_abs() < 1e-12);
        let wide = m.transpose();
        let d = svd(&wide, 1e-12).unwrap();
        let sig = CMatrix::diag(&d.sigma.iter().map(|&s| c(s, 0.0)).collect::<Vec<_>>());
        let back = d.u.matmul(&sig).unwrap().matmul(&d.v.adjoint()).unwrap();
        assert!(back.sub(&wide).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let m = CMatrix::from_fn(90, 70, |i, j| {
            c(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i * j) % 5) as f64 * 0.5)
        });
        let dense = singular_values(&m, 1e-12).unwrap().largest();
        assert_abs_diff_eq!(operator_norm(&m, 1e-12).unwrap(), dense, epsilon = 1e-9);
        assert_abs_diff_eq!(operator_norm(&m.adjoint(), 1e-12).unwrap(), dense, epsilon = 1e-9);
    }

    #[test]
    fn truncation_is_exact_for_low_rank() {
        let n = 60;
        let m = CMatrix::from_fn(n, n, |i, j| c(0.5f64.powi((i + j) as i32), 0.0));
        let s = singular_values(&m, 1e-12).unwrap();
        assert_abs_diff_eq!(s.values[0], 1.0 / (1.0 - 0.25), epsilon = 1e-12);
        assert!(s.values[1] < 1e-12);
    }
}
