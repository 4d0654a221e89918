//! Spherical functions on the homogeneous tree and their closed-form Schur norms.
//!
//! For finite `q` a spherical function with eigenvalue `s` satisfies
//! `phi(n+1) = s (1 + 1/q) phi(n) - phi(n-1) / q`, `phi(0) = 1`, `phi(1) = s`,
//! and `s = (q^-z + q^(z-1)) / (1 + 1/q)`. The characteristic roots are
//! `a = q^-z` and `b = q^(z-1)` with `ab = 1/q`. For infinite `q`, `phi(n) = s^n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radial::{RadialSymbol, TailModel};
use crate::Degree;

/// Below this root separation the two-root closed form is replaced by the recurrence.
pub const CONFLUENCE_THRESHOLD: f64 = 1e-8;
/// Tolerance for recognising `z` on the lattice where `s_z = +-1`.
pub const LATTICE_TOL: f64 = 1e-12;

fn qpow(q: f64, w: Complex64) -> Complex64 {
    (w * q.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalParam {
    pub q: Degree,
    pub s: Complex64,
    pub z: Option<Complex64>,
}

impl SphericalParam {
    pub fn from_s(q: Degree, s: Complex64) -> Self {
        Self { q, s, z: None }
    }

    pub fn from_z(q: u32, z: Complex64) -> Result<Self> {
        let d = Degree::finite(q as u64)?;
        Ok(Self {
            q: d,
            s: eigenvalue_from_z(q, z),
            z: Some(z),
        })
    }
}

/// `s_z = (1 + 1/q)^-1 (q^-z + q^(z-1))`.
pub fn eigenvalue_from_z(q: u32, z: Complex64) -> Complex64 {
    let qf = q as f64;
    (qpow(qf, -z) + qpow(qf, z - 1.0)) / (1.0 + 1.0 / qf)
}

/// Roots of `t^2 - (1 + 1/q) s t + 1/q`, larger modulus first.
pub fn characteristic_roots(q: u32, s: Complex64) -> (Complex64, Complex64) {
    let qf = q as f64;
    let p = s * (1.0 + 1.0 / qf);
    let disc = (p * p - 4.0 / qf).sqrt();
    let r1 = (p + disc) * 0.5;
    let r2 = (p - disc) * 0.5;
    if r1.norm() >= r2.norm() {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// Strict open ellipse `Re(s)^2 + ((q+1)/(q-1))^2 Im(s)^2 < 1`, plus `s = +-1`.
pub fn in_ellipse(q: Degree, s: Complex64) -> bool {
    if is_unit_point(s) {
        return true;
    }
    let k = q.ellipse_factor();
    s.re * s.re + k * k * s.im * s.im < 1.0
}

fn is_unit_point(s: Complex64) -> bool {
    s.im == 0.0 && s.re.abs() == 1.0
}

/// `phi(0..count)` by the three-term recurrence (powers of `s` at infinity).
pub fn spherical_values(q: Degree, s: Complex64, count: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    match q {
        Degree::Infinite => {
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..count {
                out.push(p);
                p *= s;
            }
        }
        Degree::Finite(q) => {
            let qf = q as f64;
            let k = s * (1.0 + 1.0 / qf);
            let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), s);
            for n in 0..count {
                if n == 0 {
                    out.push(prev);
                    continue;
                }
                out.push(cur);
                let next = k * cur - prev / qf;
                prev = cur;
                cur = next;
            }
        }
    }
    out
}

fn single_value(q: Degree, s: Complex64, n: usize) -> Complex64 {
    match q {
        Degree::Infinite => s.powi(n as i32),
        Degree::Finite(_) => spherical_values(q, s, n + 1)[n],
    }
}

/// Geometric envelope for `phi` when `s` lies inside the ellipse.
fn geometric_envelope(q: u32, s: Complex64) -> (f64, f64) {
    let (a, b) = characteristic_roots(q, s);
    let r = a.norm();
    if (a - b).norm() >= CONFLUENCE_THRESHOLD {
        let alpha = (s - b) / (a - b);
        let beta = (a - s) / (a - b);
        let bound = alpha.norm() + beta.norm();
        if bound <= 1e3 {
            return (r, bound);
        }
    }
    {
        // |phi(n)| <= r^n + |s - a| n r^(n-1); dominate by C sqrt(r)^n.
        let rho = r.sqrt();
        let k = (s - a).norm();
        let mut best: f64 = 1.0;
        let mut n = 1usize;
        loop {
            let v = (r / rho).powi(n as i32) * (1.0 + k * n as f64 / r);
            best = best.max(v);
            if v < best * 0.5 && n > 8 {
                break;
            }
            n += 1;
        }
        (rho, best)
    }
}

/// Spherical function as a radial symbol with its tail model: geometric
/// inside the ellipse, a pure parity limit at `s = +-1`, undeclared outside.
pub fn spherical_symbol(param: SphericalParam) -> Result<RadialSymbol> {
    let SphericalParam { q, s, .. } = param;
    let label = format!("spherical(q={q}, s={s})");
    if is_unit_point(s) {
        let zero = Complex64::new(0.0, 0.0);
        let (cp, cm) = if s.re > 0.0 { (Complex64::new(1.0, 0.0), zero) } else { (zero, Complex64::new(1.0, 0.0)) };
        let tail = TailModel::ParityLimit {
            c_plus: cp,
            c_minus: cm,
            remainder: Box::new(TailModel::FiniteSupport { len: 0 }),
        };
        return Ok(RadialSymbol::new(label, tail, move |n| single_value(q, s, n))?
            .with_batch(move |count| spherical_values(q, s, count)));
    }
    let tail = if !in_ellipse(q, s) {
        TailModel::Undeclared
    } else {
        match q {
            Degree::Infinite => TailModel::geometric(s.norm(), 1.0),
            Degree::Finite(qq) => {
                let (ratio, bound) = geometric_envelope(qq, s);
                TailModel::geometric(ratio, bound)
            }
        }
    };
    Ok(RadialSymbol::new(label, tail, move |n| single_value(q, s, n))?
        .with_batch(move |count| spherical_values(q, s, count)))
}

/// `f(z) = (q+1)^-1 (q^(1-z) - q^(z-1)) / (q^-z - q^(z-1))`.
pub fn f_coefficient(q: u32, z: Complex64) -> Complex64 {
    let qf = q as f64;
    (qpow(qf, 1.0 - z) - qpow(qf, z - 1.0)) / ((qf + 1.0) * (qpow(qf, -z) - qpow(qf, z - 1.0)))
}

/// `phi(n) = f(z) q^(-zn) + f(1-z) q^((z-1)n)`, with the recurrence used at
/// the removable singularity `q^-z = q^(z-1)`.
pub fn spherical_symbol_closed_form(q: u32, z: Complex64, count: usize) -> Vec<Complex64> {
    let qf = q as f64;
    let a = qpow(qf, -z);
    let b = qpow(qf, z - 1.0);
    if (a - b).norm() < CONFLUENCE_THRESHOLD {
        return spherical_values(Degree::Finite(q), eigenvalue_from_z(q, z), count);
    }
    let fa = f_coefficient(q, z);
    let fb = f_coefficient(q, 1.0 - z);
    (0..count)
        .map(|n| fa * a.powi(n as i32) + fb * b.powi(n as i32))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Multiplier(f64),
    NotMultiplier,
}

impl NormValue {
    pub fn value(self) -> Option<f64> {
        match self {
            NormValue::Multiplier(v) => Some(v),
            NormValue::NotMultiplier => None,
        }
    }
}

/// `|1 - s^2| / (1 - Re(s)^2 - ((q+1)/(q-1))^2 Im(s)^2)`, and 1 at `s = +-1`.
pub fn schur_norm_in_s(q: Degree, s: Complex64) -> NormValue {
    if is_unit_point(s) {
        return NormValue::Multiplier(1.0);
    }
    let k = q.ellipse_factor();
    let quad = s.re * s.re + k * k * s.im * s.im;
    // same rounding as `in_ellipse`, so the two never disagree
    if quad < 1.0 {
        NormValue::Multiplier((1.0 - s * s).norm() / (1.0 - quad))
    } else {
        NormValue::NotMultiplier
    }
}

fn on_unit_lattice(q: u32, z: Complex64) -> bool {
    let edge = z.re.abs() <= LATTICE_TOL || (z.re - 1.0).abs() <= LATTICE_TOL;
    if !edge {
        return false;
    }
    let k = z.im * (q as f64).ln() / std::f64::consts::PI;
    (k - k.round()).abs() <= LATTICE_TOL * k.abs().max(1.0)
}

/// Closed-form norm in the `z` parametrization: finite on the strip
/// `0 < Re z < 1` and equal to 1 on the lattice where `s_z = +-1`.
pub fn schur_norm_in_z(q: u32, z: Complex64) -> NormValue {
    if on_unit_lattice(q, z) {
        return NormValue::Multiplier(1.0);
    }
    let x = z.re;
    if !(x > 0.0 && x < 1.0) {
        return NormValue::NotMultiplier;
    }
    let qf = q as f64;
    let num = (1.0 - 1.0 / qf).powi(2)
        * (Complex64::new(1.0, 0.0) - qpow(qf, -2.0 * z)).norm()
        * (Complex64::new(1.0, 0.0) - qpow(qf, 2.0 * z - 2.0)).norm();
    let den = (1.0 - qf.powf(-2.0 * x))
        * (1.0 - qf.powf(2.0 * x - 2.0))
        * (Complex64::new(1.0, 0.0) - qpow(qf, Complex64::new(-1.0, 2.0 * z.im))).norm_sqr();
    NormValue::Multiplier(num / den)
}

/// `sum_n [(a^(n+1) - b^(n+1))/(a - b)] [(c^(n+1) - d^(n+1))/(c - d)]` in closed form
/// `(1 - abcd) / ((1 - ac)(1 - bd)(1 - ad)(1 - bc))`; the confluent cases are the
/// continuous extension, where the quotients become `(n+1) a^n`.
pub fn hankel_product_sum(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Complex64> {
    if [a, b, c, d].iter().any(|x| !(x.norm() < 1.0)) {
        return Err(Error::InvalidArgument("all four parameters must lie in the open unit disc".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((one - a * b * c * d) / ((one - a * c) * (one - b * d) * (one - a * d) * (one - b * c)))
}
