//! Bounded-precision `q`-adic numbers, 2x2 lattices and Mautner's spherical
//! function on `PGL_2(Q_q)`.
//!
//! A nonzero element is `q^v * u` with `u` a unit known modulo `q^P`. Zeros
//! produced by cancellation are kept as inexact zeros together with the
//! absolute precision `a` to which they vanish (`x = 0 mod q^a`).

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spherical::{eigenvalue_from_z, spherical_symbol_closed_form, spherical_values};
use crate::Degree;

pub const DEFAULT_PRECISION: u32 = 64;
/// Below this `|q^(z-1/2) - q^(1/2-z)|` the quotient formula is replaced by the recurrence.
pub const CONFLUENT_THRESHOLD: f64 = 1e-8;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// `None` for the exact zero, otherwise `x = 0 mod q^a`.
    Zero(Option<i64>),
    Unit { val: i64, unit: BigUint, prec: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdic {
    q: u64,
    repr: Repr,
}

fn big_pow(q: u64, e: u32) -> BigUint {
    num_traits::pow(BigUint::from(q), e as usize)
}

/// Strips factors of `q` from a nonzero integer and returns the count.
fn split_valuation(x: &BigInt, q: u64) -> (i64, BigInt) {
    let qb = BigInt::from(q);
    let mut v = 0;
    let mut rest = x.clone();
    loop {
        let (d, r) = rest.div_rem(&qb);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = d;
        v += 1;
    }
}

fn reduce(x: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    x.mod_floor(&m).to_biguint().expect("non-negative after mod_floor")
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Result<(BigInt, BigInt)> {
    let bad = || Error::InvalidArgument(format!("cannot parse rational {s:?}"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, BigInt::one()),
    };
    Ok((n, d))
}

fn check_prime(q: u64) -> Result<()> {
    if is_prime(q) {
        Ok(())
    } else {
        Err(Error::NotPrime(q))
    }
}

#[allow(clippy::should_implement_trait)]
impl PAdic {
    pub fn zero(q: u64) -> Result<Self> {
        check_prime(q)?;
        Ok(Self { q, repr: Repr::Zero(None) })
    }

    pub fn one(q: u64, prec: u32) -> Result<Self> {
        Self::from_rational(q, 1, 1, prec)
    }

    pub fn from_rational(q: u64, num: i64, den: i64, prec: u32) -> Result<Self> {
        Self::from_bigint_rational(q, &BigInt::from(num), &BigInt::from(den), prec)
    }

    pub fn from_bigint_rational(q: u64, num: &BigInt, den: &BigInt, prec: u32) -> Result<Self> {
        check_prime(q)?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if prec == 0 {
            return Err(Error::InvalidArgument("precision must be at least one digit".into()));
        }
        if num.is_zero() {
            return Ok(Self { q, repr: Repr::Zero(None) });
        }
        let (vn, un) = split_valuation(num, q);
        let (vd, ud) = split_valuation(den, q);
        let modulus = big_pow(q, prec);
        let inv = reduce(&ud, &modulus).modinv(&modulus).expect("unit is invertible");
        let unit = (reduce(&un, &modulus) * inv) % &modulus;
        Ok(Self {
            q,
            repr: Repr::Unit { val: vn - vd, unit, prec },
        })
    }

    /// `q^k` as an exact element.
    pub fn power_of_q(q: u64, k: i64, prec: u32) -> Result<Self> {
        check_prime(q)?;
        Ok(Self {
            q,
            repr: Repr::Unit {
                val: k,
                unit: BigUint::one(),
                prec,
            },
        })
    }

    pub fn prime(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(_))
    }

    /// `None` for zeros.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(_) => None,
            Repr::Unit { val, .. } => Some(*val),
        }
    }

    /// `q^-v`, and 0 for zeros.
    pub fn norm(&self) -> f64 {
        match &self.repr {
            Repr::Zero(_) => 0.0,
            Repr::Unit { val, .. } => (self.q as f64).powf(-(*val as f64)),
        }
    }

    /// Certified digits of the unit part; `None` for the exact zero.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero(None) => None,
            Repr::Zero(Some(_)) => Some(0),
            Repr::Unit { prec, .. } => Some(*prec),
        }
    }

    /// Exponent `a` with the element known modulo `q^a`; `None` when exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(a) => *a,
            Repr::Unit { val, prec, .. } => Some(val + *prec as i64),
        }
    }

    /// Base-`q` digits of the unit part, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero(_) => Vec::new(),
            Repr::Unit { unit, prec, .. } => {
                let qb = BigUint::from(self.q);
                let mut u = unit.clone();
                (0..*prec)
                    .map(|_| {
                        let (d, r) = u.div_rem(&qb);
                        u = d;
                        r.to_u64().unwrap_or(0)
                    })
                    .collect()
            }
        }
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.q, other.q))
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero(_) => self.clone(),
            Repr::Unit { val, unit, prec } => {
                let m = big_pow(self.q, *prec);
                Self {
                    q: self.q,
                    repr: Repr::Unit {
                        val: *val,
                        unit: &m - unit,
                        prec: *prec,
                    },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let q = self.q;
        let (x, y) = match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) => return Ok(other.clone()),
            (_, Repr::Zero(None)) => return Ok(self.clone()),
            (Repr::Zero(Some(a)), Repr::Zero(Some(b))) => {
                return Ok(Self {
                    q,
                    repr: Repr::Zero(Some(*a.min(b))),
                })
            }
            (Repr::Zero(Some(a)), _) => return Ok(other.truncate_absolute(*a)),
            (_, Repr::Zero(Some(b))) => return Ok(self.truncate_absolute(*b)),
            (Repr::Unit { val: vx, .. }, Repr::Unit { val: vy, .. }) => {
                if vx <= vy {
                    (self, other)
                } else {
                    (other, self)
                }
            }
        };
        let (Repr::Unit { val: vx, unit: ux, prec: px }, Repr::Unit { val: vy, unit: uy, prec: py }) = (&x.repr, &y.repr) else {
            unreachable!()
        };
        let abs = (vx + *px as i64).min(vy + *py as i64);
        let width = (abs - vx) as u32;
        let modulus = big_pow(q, width);
        let shift = big_pow(q, (vy - vx) as u32);
        let s = (ux + shift * uy) % &modulus;
        if s.is_zero() {
            return Ok(Self {
                q,
                repr: Repr::Zero(Some(abs)),
            });
        }
        let qb = BigUint::from(q);
        let mut k = 0u32;
        let mut u = s;
        while (&u % &qb).is_zero() {
            u /= &qb;
            k += 1;
        }
        Ok(Self {
            q,
            repr: Repr::Unit {
                val: vx + k as i64,
                unit: u,
                prec: width - k,
            },
        })
    }

    /// Forgets everything beyond `q^a`.
    fn truncate_absolute(&self, a: i64) -> Self {
        match &self.repr {
            Repr::Zero(b) => Self {
                q: self.q,
                repr: Repr::Zero(Some(b.map_or(a, |b| b.min(a)))),
            },
            Repr::Unit { val, unit, prec } => {
                if *val >= a {
                    return Self {
                        q: self.q,
                        repr: Repr::Zero(Some(a)),
                    };
                }
                let p = (*prec as i64).min(a - val) as u32;
                Self {
                    q: self.q,
                    repr: Repr::Unit {
                        val: *val,
                        unit: unit % big_pow(self.q, p),
                        prec: p,
                    },
                }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let q = self.q;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) | (_, Repr::Zero(None)) => Repr::Zero(None),
            (Repr::Zero(Some(a)), Repr::Zero(Some(b))) => Repr::Zero(Some(a + b)),
            (Repr::Zero(Some(a)), Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::Zero(Some(a))) => Repr::Zero(Some(a + val)),
            (Repr::Unit { val: vx, unit: ux, prec: px }, Repr::Unit { val: vy, unit: uy, prec: py }) => {
                let p = *px.min(py);
                Repr::Unit {
                    val: vx + vy,
                    unit: (ux * uy) % big_pow(q, p),
                    prec: p,
                }
            }
        };
        Ok(Self { q, repr })
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero(None) => Err(Error::DivideByZero),
            Repr::Zero(Some(_)) => Err(Error::PrecisionExhausted("inverting a zero known only to finite precision".into())),
            Repr::Unit { val, unit, prec } => {
                let m = big_pow(self.q, *prec);
                Ok(Self {
                    q: self.q,
                    repr: Repr::Unit {
                        val: -val,
                        unit: unit.modinv(&m).expect("unit is invertible"),
                        prec: *prec,
                    },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    /// Equality modulo the smaller absolute precision of the two operands.
    pub fn approx_eq(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero(None) => write!(f, "0"),
            Repr::Zero(Some(a)) => write!(f, "O({}^{a})", self.q),
            Repr::Unit { val, prec, .. } => {
                let digits: Vec<String> = self.digits().iter().take(8).map(|d| d.to_string()).collect();
                let more = if *prec > 8 { "..." } else { "" };
                write!(f, "{}^{val} * [{}{more}]_{}", self.q, digits.join(" "), self.q)
            }
        }
    }
}

/// A 2x2 matrix over `Q_q`, row-major, with its determinant cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PMatrix2 {
    e: [PAdic; 4],
    det: PAdic,
}

impl PMatrix2 {
    pub fn new(e: [PAdic; 4]) -> Result<Self> {
        let q = e[0].q;
        for x in &e[1..] {
            if x.q != q {
                return Err(Error::PrimeMismatch(q, x.q));
            }
        }
        let det = e[0].mul(&e[3])?.sub(&e[1].mul(&e[2])?)?;
        match det.repr {
            Repr::Zero(None) => Err(Error::InvalidArgument("matrix is singular".into())),
            Repr::Zero(Some(_)) => Err(Error::PrecisionExhausted("determinant vanishes to working precision".into())),
            _ => Ok(Self { e, det }),
        }
    }

    /// From four rationals `n/d`, row-major.
    pub fn from_rationals(q: u64, entries: [(i64, i64); 4], prec: u32) -> Result<Self> {
        Self::from_bigint_rationals(q, &entries.map(|(n, d)| (BigInt::from(n), BigInt::from(d))), prec)
    }

    /// From four rationals `n/d`, row-major. A singular matrix is detected
    /// exactly over the rationals before any precision is lost.
    pub fn from_bigint_rationals(q: u64, entries: &[(BigInt, BigInt); 4], prec: u32) -> Result<Self> {
        if entries.iter().any(|(_, d)| d.is_zero()) {
            return Err(Error::ZeroDenominator);
        }
        let [(n0, d0), (n1, d1), (n2, d2), (n3, d3)] = entries;
        if n0 * n3 * d1 * d2 == n1 * n2 * d0 * d3 {
            return Err(Error::InvalidArgument("matrix is singular".into()));
        }
        let e = entries.each_ref().map(|(n, d)| PAdic::from_bigint_rational(q, n, d, prec));
        let [a, b, c, d] = e;
        Self::new([a?, b?, c?, d?])
    }

    pub fn identity(q: u64, prec: u32) -> Result<Self> {
        Self::from_rationals(q, [(1, 1), (0, 1), (0, 1), (1, 1)], prec)
    }

    /// `diag(q^i, q^j)`.
    pub fn diag_powers(q: u64, i: i64, j: i64, prec: u32) -> Result<Self> {
        let z = PAdic::zero(q)?;
        Self::new([PAdic::power_of_q(q, i, prec)?, z.clone(), z, PAdic::power_of_q(q, j, prec)?])
    }

    pub fn entry(&self, i: usize, j: usize) -> &PAdic {
        &self.e[2 * i + j]
    }

    pub fn det(&self) -> &PAdic {
        &self.det
    }

    pub fn prime(&self) -> u64 {
        self.e[0].q
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let a = &self.e;
        let b = &other.e;
        let f = |i: usize, j: usize| -> Result<PAdic> { a[2 * i].mul(&b[j])?.add(&a[2 * i + 1].mul(&b[2 + j])?) };
        Self::new([f(0, 0)?, f(0, 1)?, f(1, 0)?, f(1, 1)?])
    }

    pub fn scale(&self, s: &PAdic) -> Result<Self> {
        let [a, b, c, d] = &self.e;
        Self::new([a.mul(s)?, b.mul(s)?, c.mul(s)?, d.mul(s)?])
    }

    /// `[[d, -b], [-c, a]]`.
    pub fn adjugate(&self) -> Result<Self> {
        let [a, b, c, d] = &self.e;
        Self::new([d.clone(), b.neg(), c.neg(), a.clone()])
    }

    pub fn inverse(&self) -> Result<Self> {
        self.adjugate()?.scale(&self.det.inv()?)
    }
}

/// Tree distance between the lattice classes spanned by the columns of `a`
/// and `b`: the gap between the elementary divisor valuations of `a^-1 b`,
/// `v(det a) + v(det b) - 2 min_ij v((adj(a) b)_ij)`.
pub fn lattice_distance(a: &PMatrix2, b: &PMatrix2) -> Result<u64> {
    if a.prime() != b.prime() {
        return Err(Error::PrimeMismatch(a.prime(), b.prime()));
    }
    let adj = a.adjugate()?;
    let c = [0, 1, 2, 3].map(|k| {
        let (i, j) = (k / 2, k % 2);
        adj.e[2 * i]
            .mul(&b.e[j])
            .and_then(|x| x.add(&adj.e[2 * i + 1].mul(&b.e[2 + j])?))
    });
    let mut min_val: Option<i64> = None;
    let mut zero_floor: Option<i64> = None;
    for x in c {
        let x = x?;
        match (&x.repr, x.valuation()) {
            (_, Some(v)) => min_val = Some(min_val.map_or(v, |m| m.min(v))),
            (Repr::Zero(Some(abs)), None) => zero_floor = Some(zero_floor.map_or(*abs, |z| z.min(*abs))),
            _ => {}
        }
    }
    let m = min_val.ok_or_else(|| Error::PrecisionExhausted("all entries of adj(A) B vanish to working precision".into()))?;
    if let Some(z) = zero_floor {
        if z <= m {
            return Err(Error::PrecisionExhausted(
                "an inexact zero entry could lower the minimal valuation".into(),
            ));
        }
    }
    let va = a.det.valuation().expect("nonzero determinant");
    let vb = b.det.valuation().expect("nonzero determinant");
    let d = va + vb - 2 * m;
    debug_assert!(d >= 0);
    Ok(d as u64)
}

fn qpow(q: f64, w: Complex64) -> Complex64 {
    (w * q.ln()).exp()
}

/// `Phi_z(y^n)` for `y = diag(q, 1)`, by Mautner's quotient formula.
pub fn mautner_spherical(q: u32, z: Complex64, n: usize) -> Complex64 {
    let qf = q as f64;
    let half = Complex64::new(0.5, 0.0);
    let den_core = qpow(qf, z - half) - qpow(qf, half - z);
    if den_core.norm() < CONFLUENT_THRESHOLD {
        let s = eigenvalue_from_z(q, z);
        return spherical_values(Degree::Finite(q), s, n + 1)[n];
    }
    let nf = n as f64;
    let a = qpow(qf, (z - half) * nf) * (qpow(qf, 1.5 + z) - qpow(qf, 1.5 - z));
    let b = qpow(qf, -(z - half) * nf) * (qpow(qf, 2.5 - z) - qpow(qf, 0.5 + z));
    let den = (qf + 1.0) * qf.powf(nf / 2.0 + 1.0) * den_core;
    (a - b) / den
}

/// `Phi_z(g)` for `g` in `GL_2(Q_q)`, through the distance `d(g L_0, L_0)`.
pub fn group_spherical(z: Complex64, g: &PMatrix2) -> Result<Complex64> {
    let q = g.prime();
    let id = PMatrix2::identity(q, g.det.precision().unwrap_or(DEFAULT_PRECISION).max(1))?;
    let n = lattice_distance(&id, g)?;
    Ok(mautner_spherical(q as u32, z, n as usize))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondenceReport {
    pub max_error: f64,
    pub confluent: bool,
}

/// `max_{n <= N} |Phi_z(y^n) - phi_z(n)|` against the tree closed form.
pub fn correspondence_check(q: u32, z: Complex64, n: usize) -> CorrespondenceReport {
    let qf = q as f64;
    let half = Complex64::new(0.5, 0.0);
    let confluent = (qpow(qf, z - half) - qpow(qf, half - z)).norm() < CONFLUENT_THRESHOLD;
    let tree = spherical_symbol_closed_form(q, z, n + 1);
    let max_error = (0..=n)
        .map(|k| (mautner_spherical(q, z, k) - tree[k]).norm())
        .fold(0.0, f64::max);
    CorrespondenceReport { max_error, confluent }
}
