//! Integral representation of trace-class Hankel matrices on the unit disc.
//!
//! For a coefficient sequence `c_n` with Hankel matrix `h[i][j] = c_{i+j}`, put
//! `g(z) = sum (n+1)(n+2) c_n z^n`. Then
//! `h[i][j] = (1/pi) int_D g(conj z) z^(i+j) (1 - |z|^2) dA` and
//! `||H||_1 <= (1/pi) int_D |g| dA <= (8/pi) ||H||_1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radial::{schur_norm, HankelMatrix, RadialSymbol, TailModel};
use crate::spectral;
use crate::Degree;

/// Largest number of Taylor coefficients kept when expanding `g`.
pub const MAX_TAYLOR_TERMS: usize = 1 << 14;
/// Target for the sup-norm of the discarded part of `g` on the closed disc.
pub const TAYLOR_TAIL_TARGET: f64 = 1e-14;
pub const DEFAULT_RADIAL_NODES: usize = 80;
pub const DEFAULT_ANGULAR_NODES: usize = 256;
const MAX_RADIAL_NODES: usize = 1280;

/// `gamma_n = Gamma(n + 3/2) / (Gamma(3/2) Gamma(n + 1))`, the Taylor
/// coefficients of `(1 - x)^(-3/2)`.
pub fn gamma_coeffs(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for k in 1..=n {
        let prev = out[k - 1];
        out.push(prev * (k as f64 + 0.5) / k as f64);
    }
    out
}

/// `sum_i gamma_i gamma_(n-i) = (n+1)(n+2)/2`, checked at relative tolerance `1e-10`.
pub fn gamma_convolution_check(n: usize) -> bool {
    let g = gamma_coeffs(n);
    let lhs: f64 = (0..=n).map(|i| g[i] * g[n - i]).sum();
    let exact = ((n + 1) * (n + 2)) as f64 / 2.0;
    (lhs - exact).abs() <= 1e-10 * ((n + 1) * (n + 2)) as f64
}

/// `g(z) = sum g_n z^n` with `g_n = (n+1)(n+2) c_n`, stored through its first
/// coefficients and a geometric envelope `|c_n| <= bound * ratio^n` beyond them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticDiscFunction {
    coeffs: Vec<Complex64>,
    ratio: f64,
    bound: f64,
}

impl AnalyticDiscFunction {
    /// From `c_0, ..., c_(K-1)` and an envelope for `n >= K`.
    pub fn from_coefficients(c: &[Complex64], ratio: f64, bound: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) || !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tail envelope needs 0 <= ratio < 1 and finite bound, got ({ratio}, {bound})"
            )));
        }
        let coeffs = c
            .iter()
            .enumerate()
            .map(|(n, &v)| v * ((n + 1) * (n + 2)) as f64)
            .collect();
        Ok(Self { coeffs, ratio, bound })
    }

    pub fn zero() -> Self {
        Self {
            coeffs: Vec::new(),
            ratio: 0.0,
            bound: 0.0,
        }
    }

    /// Taylor coefficients `g_n` that are stored explicitly.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Bound on `sup_D |g - g_K|` where `g_K` is the stored polynomial.
    pub fn tail_sup_bound(&self) -> f64 {
        tail_series(self.coeffs.len(), self.ratio, self.bound)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * alpha).collect(),
            ratio: self.ratio,
            bound: self.bound * alpha.norm(),
        }
    }
}

/// `bound * sum_{n >= k} (n+1)(n+2) ratio^n`.
fn tail_series(k: usize, ratio: f64, bound: f64) -> f64 {
    if bound == 0.0 || ratio == 0.0 && k > 0 {
        return 0.0;
    }
    let r = ratio;
    let one = 1.0 - r;
    // sum_{n>=k} (n+1)(n+2) r^n = r^k [ (k+1)(k+2)/(1-r) + 2(k+2) r/(1-r)^2 + 2 r^2/(1-r)^3 ]
    let kf = k as f64;
    let rk = r.powf(kf);
    bound * rk * ((kf + 1.0) * (kf + 2.0) / one + 2.0 * (kf + 2.0) * r / (one * one) + 2.0 * r * r / (one * one * one))
}

/// Envelope `|h_d| <= bound * ratio^d` for `d >= onset` implied by a tail model.
fn difference_envelope(model: &TailModel) -> Option<(f64, f64, usize)> {
    match model {
        TailModel::FiniteSupport { len } => Some((0.0, 0.0, *len)),
        TailModel::Geometric { ratio, bound, onset } => Some((*ratio, bound * (1.0 + ratio * ratio), *onset)),
        TailModel::ParityLimit { remainder, .. } => difference_envelope(remainder),
        TailModel::Lacunary { .. } | TailModel::Undeclared => None,
    }
}

/// `g` for the difference sequence `c_n = phi(n) - phi(n+2)`.
pub fn g_from_symbol(sym: &RadialSymbol) -> Result<AnalyticDiscFunction> {
    let (ratio, bound, onset) = difference_envelope(sym.tail()).ok_or(Error::UndeclaredTail)?;
    // Beyond `onset` rescale the envelope so it applies from index 0 of the tail.
    let mut k = onset.max(1);
    while tail_series(k, ratio, bound) > TAYLOR_TAIL_TARGET {
        k = (k * 2).max(16);
        if k > MAX_TAYLOR_TERMS {
            return Err(Error::NoConvergence {
                what: "Taylor truncation of g",
                iterations: MAX_TAYLOR_TERMS,
                residual: tail_series(MAX_TAYLOR_TERMS, ratio, bound),
            });
        }
    }
    // Shrink back to the smallest adequate length.
    let mut lo = onset.max(1);
    while lo < k {
        let mid = (lo + k) / 2;
        if tail_series(mid, ratio, bound) <= TAYLOR_TAIL_TARGET {
            k = mid;
        } else {
            lo = mid + 1;
        }
    }
    let phi = sym.values(k + 2);
    let c: Vec<Complex64> = (0..k).map(|n| phi[n] - phi[n + 2]).collect();
    AnalyticDiscFunction::from_coefficients(&c, ratio, bound)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = t;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, t);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        if n > 1 {
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Tensor rule for `(1/pi) int_D f dA`: Gauss-Legendre in the radius and the
/// trapezoid rule in the angle.
#[derive(Debug, Clone)]
pub struct PolarQuadrature {
    n_r: usize,
    n_theta: usize,
    graded: bool,
    /// `(r_k, w_k)` with `sum_k w_k f(r_k) ~ 2 int_0^1 f(r) r dr`.
    radial: Vec<(f64, f64)>,
    /// `(theta_l, v_l)` with `sum_l v_l f(theta_l) ~ (1/2pi) int f dtheta`.
    angular: Vec<(f64, f64)>,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl PolarQuadrature {
    /// Builds and validates the rule against the closed moments
    /// `(1/pi) int z^a conj(z)^b (1 - |z|^2) dA = [a = b] / ((a+1)(a+2))`.
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        Self::build(n_r, n_theta, false)
    }

    /// Same radial rule, with angles `theta = t - sin(2t)/2` for uniform `t`,
    /// which crowds nodes towards the real axis where `1 - z^2` vanishes on the
    /// boundary. The rule stays validated against the closed moments.
    pub fn graded(n_r: usize, n_theta: usize) -> Result<Self> {
        Self::build(n_r, n_theta, true)
    }

    fn build(n_r: usize, n_theta: usize, graded: bool) -> Result<Self> {
        if n_r == 0 || n_theta == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node per axis".into()));
        }
        let (x, w) = gauss_legendre(n_r);
        let radial: Vec<(f64, f64)> = x.iter().zip(&w).map(|(xi, wi)| {
            let r = (xi + 1.0) / 2.0;
            // 2 r dr with dr = dx/2
            (r, wi * r)
        }).collect();
        let angular: Vec<(f64, f64)> = (0..n_theta)
            .filter_map(|k| {
                let t = 2.0 * PI * k as f64 / n_theta as f64;
                let (th, jac) = if graded { (t - (2.0 * t).sin() / 2.0, 1.0 - (2.0 * t).cos()) } else { (t, 1.0) };
                (jac != 0.0).then_some((th, jac / n_theta as f64))
            })
            .collect();
        let mut nodes = Vec::with_capacity(radial.len() * angular.len());
        let mut weights = Vec::with_capacity(radial.len() * angular.len());
        for &(r, wr) in &radial {
            for &(th, wt) in &angular {
                nodes.push(Complex64::from_polar(r, th));
                weights.push(wr * wt);
            }
        }
        let quad = Self {
            n_r,
            n_theta,
            graded,
            radial,
            angular,
            nodes,
            weights,
        };
        quad.validate()?;
        Ok(quad)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Weights for `(1/pi) dA`; they sum to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn doubled(&self) -> Result<Self> {
        Self::build(2 * self.n_r, 2 * self.n_theta, self.graded)
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).sum()
    }

    /// Largest deviation from the closed moments for `a, b <= max`, using
    /// the tensor structure: the moment factors into a radial and an angular sum.
    pub fn moment_defect(&self, max: usize) -> f64 {
        let radial: Vec<f64> = (0..=2 * max)
            .map(|k| self.radial.iter().map(|&(r, w)| w * r.powi(k as i32) * (1.0 - r * r)).sum())
            .collect();
        let angular: Vec<Complex64> = (0..=max)
            .map(|k| self.angular.iter().map(|&(th, v)| Complex64::from_polar(v, k as f64 * th)).sum())
            .collect();
        let mut worst: f64 = 0.0;
        for a in 0..=max {
            for b in 0..=max {
                let ang = if a >= b { angular[a - b] } else { angular[b - a].conj() };
                let v = ang * radial[a + b];
                let exact = if a == b { 1.0 / ((a + 1) * (a + 2)) as f64 } else { 0.0 };
                worst = worst.max((v - exact).norm());
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        // exactness needs a + b + 3 <= 2 n_r - 1 and |a - b| < n_theta
        let max = 12.min(self.n_r.saturating_sub(2)).min(self.n_theta - 1);
        let defect = self.moment_defect(max);
        if defect > 1e-12 {
            return Err(Error::NoConvergence {
                what: "quadrature moment validation",
                iterations: max,
                residual: defect,
            });
        }
        Ok(())
    }
}

impl Default for PolarQuadrature {
    fn default() -> Self {
        Self::new(DEFAULT_RADIAL_NODES, DEFAULT_ANGULAR_NODES).expect("default quadrature validates")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Node-doubling difference plus the Taylor truncation bound.
    pub error: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

/// `(1/pi) int_D |g| dA` with the default relative tolerance `1e-8`.
pub fn disc_l1_norm(g: &AnalyticDiscFunction, quad: &PolarQuadrature) -> Result<QuadratureEstimate> {
    disc_l1_norm_with(g, quad, 1e-8)
}

/// Doubles the rule until the estimated error is below `tol` times the value,
/// so the stopping level does not depend on the scale of `g`.
pub fn disc_l1_norm_with(g: &AnalyticDiscFunction, quad: &PolarQuadrature, tol: f64) -> Result<QuadratureEstimate> {
    let l1 = |qd: &PolarQuadrature| -> f64 { neumaier(qd.nodes.iter().zip(&qd.weights).map(|(&z, &w)| w * g.eval(z).norm())) };
    let tail = g.tail_sup_bound();
    let mut coarse = quad.clone();
    let mut v_coarse = l1(&coarse);
    loop {
        let fine = coarse.doubled()?;
        let v_fine = l1(&fine);
        let error = (v_fine - v_coarse).abs() + tail;
        if error <= tol * v_fine {
            return Ok(QuadratureEstimate {
                value: v_fine,
                error,
                n_r: fine.n_r,
                n_theta: fine.n_theta,
            });
        }
        if fine.n_r >= MAX_RADIAL_NODES {
            return Err(Error::NoConvergence {
                what: "disc L1 quadrature",
                iterations: fine.n_r,
                residual: error,
            });
        }
        coarse = fine;
        v_coarse = v_fine;
    }
}

/// Compensated summation.
fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `m_d = (1/pi) int_D g(conj z) z^d (1 - |z|^2) dA` for `0 <= d <= maxdeg`;
/// the Hankel entries are `h[i][j] = m_(i+j)`.
pub fn moments_from_g(g: &AnalyticDiscFunction, quad: &PolarQuadrature, maxdeg: usize) -> Result<Vec<Complex64>> {
    if maxdeg + 3 > 2 * quad.n_r - 1 || maxdeg >= quad.n_theta {
        return Err(Error::InvalidArgument(format!(
            "quadrature ({}, {}) is not exact through degree {}",
            quad.n_r,
            quad.n_theta,
            maxdeg + 2
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); maxdeg + 1];
    for (&z, &w) in quad.nodes.iter().zip(&quad.weights) {
        let base = g.eval(z.conj()) * (w * (1.0 - z.norm_sqr()));
        let mut p = Complex64::new(1.0, 0.0);
        for m in out.iter_mut() {
            *m += base * p;
            p *= z;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PellerReport {
    /// Trace norm of the truncated Hankel matrix.
    pub lhs: f64,
    /// Disc `L1` norm of `g`.
    pub mid: f64,
    /// `(8/pi) lhs`.
    pub rhs: f64,
    /// Combined certified error of the three quantities.
    pub error: f64,
    pub holds: bool,
}

/// Checks `||H||_1 <= ||g||_1 <= (8/pi) ||H||_1` up to the combined error.
pub fn peller_sandwich(h: &HankelMatrix, g: &AnalyticDiscFunction, quad: &PolarQuadrature) -> Result<PellerReport> {
    let tol = spectral::DEFAULT_TOL;
    let lhs = spectral::trace_norm(&h.entries, tol)?;
    let lhs_err = h.tail_bound + tol * h.n as f64;
    if !lhs_err.is_finite() {
        return Err(Error::UndeclaredTail);
    }
    let mid = disc_l1_norm(g, quad)?;
    let rhs = 8.0 / PI * lhs;
    // The true trace norm lies in [lhs, lhs + lhs_err].
    let error = mid.error + 8.0 / PI * lhs_err + lhs_err;
    let holds = lhs - error <= mid.value && mid.value <= rhs + error;
    Ok(PellerReport {
        lhs,
        mid: mid.value,
        rhs,
        error,
        holds,
    })
}

/// `c+ + c-(-1)^n + sum_j w_j z_j^n` as a finite atomic measure on the disc.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscMeasure {
    atoms: Vec<(Complex64, Complex64)>,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl DiscMeasure {
    pub fn new(atoms: Vec<(Complex64, Complex64)>, c_plus: Complex64, c_minus: Complex64) -> Result<Self> {
        if let Some((z, _)) = atoms.iter().find(|(z, _)| !(z.norm() < 1.0)) {
            return Err(Error::InvalidArgument(format!("atom {z} is not inside the open unit disc")));
        }
        Ok(Self { atoms, c_plus, c_minus })
    }

    pub fn atoms(&self) -> &[(Complex64, Complex64)] {
        &self.atoms
    }

    /// `sum_j |w_j| |1 - z_j^2| / (1 - |z_j|^2)`.
    pub fn weighted_mass(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(z, w)| w.norm() * (1.0 - z * z).norm() / (1.0 - z.norm_sqr()))
            .sum()
    }

    pub fn moment(&self, n: usize) -> Complex64 {
        let sign = if n.is_multiple_of(2) { self.c_minus } else { -self.c_minus };
        self.c_plus + sign + self.atoms.iter().map(|(z, w)| w * z.powu(n as u32)).sum::<Complex64>()
    }

    /// `|c+| + |c-| + weighted_mass`.
    pub fn upper(&self) -> f64 {
        self.c_plus.norm() + self.c_minus.norm() + self.weighted_mass()
    }
}

/// Discretizes `dmu = (1/pi) (1 - |z|^2) / (1 - z^2) g(conj z) dA` on the
/// quadrature grid, with `g` built from the symbol's differences. A graded
/// rule resolves the density near `z = +-1` far better than a uniform one.
pub fn optimal_measure(sym: &RadialSymbol, c_plus: Complex64, c_minus: Complex64, quad: &PolarQuadrature) -> Result<DiscMeasure> {
    let g = g_from_symbol(sym)?;
    let atoms = quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .map(|(&z, &w)| {
            let density = (1.0 - z.norm_sqr()) / (1.0 - z * z);
            (z, g.eval(z.conj()) * density * w)
        })
        .collect();
    DiscMeasure::new(atoms, c_plus, c_minus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureReport {
    pub matches: bool,
    pub upper: f64,
    /// Largest moment mismatch over `n <= 64`.
    pub moment_error: f64,
    /// Certified Schur norm for infinite `q`, computed when the moments match.
    pub schur_norm: Option<f64>,
    pub schur_norm_error: Option<f64>,
    /// `(8/pi)(q+1)/(q-1)` for a finite degree.
    pub finite_q_constant: Option<f64>,
    /// `schur_norm <= upper + error` when computed, otherwise `true`.
    pub holds: bool,
}

pub fn measure_bound(sym: &RadialSymbol, mu: &DiscMeasure, q: Option<Degree>) -> Result<MeasureReport> {
    let phi = sym.values(65);
    let moment_error = (0..=64)
        .map(|n| (mu.moment(n) - phi[n]).norm())
        .fold(0.0, f64::max);
    let matches = moment_error <= 1e-9;
    let upper = mu.upper();
    let (schur, err) = if matches {
        let r = schur_norm(sym, Degree::Infinite, 1e-9)?;
        (Some(r.total), Some(r.certified_error))
    } else {
        (None, None)
    };
    let holds = match (schur, err) {
        (Some(v), Some(e)) => v <= upper + e + 1e-9,
        _ => true,
    };
    Ok(MeasureReport {
        matches,
        upper,
        moment_error,
        schur_norm: schur,
        schur_norm_error: err,
        finite_q_constant: q.and_then(|d| d.as_finite()).map(|_| 8.0 / PI * q.unwrap().ellipse_factor()),
        holds,
    })
}
