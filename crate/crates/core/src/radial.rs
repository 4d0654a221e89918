//! Radial symbols on `N0`, their Hankel matrices and Schur norms.
//!
//! For `phi: N0 -> C` the Hankel matrix has entries
//! `h[i][j] = phi(i + j) - phi(i + j + 2)`. The Schur norm of the distance
//! kernel on the tree of degree `q + 1` is `|c+| + |c-|` plus the trace norm of
//! `H` (q infinite) or of `H' = (1 - 1/q)(I - tau/q)^-1 H` (q finite), where
//! `tau(A) = S A S*` and `c+ + c-(-1)^n` is the limit part of `phi`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, CMatrix};
use crate::Degree;

const SPOT_CHECKS: usize = 32;
/// Relative slack allowed in tail spot checks (floating-point evaluation noise).
const SPOT_SLACK: f64 = 1e-9;

/// Declared decay behaviour of a symbol, used to certify truncation errors.
#[derive(Debug, Clone, PartialEq)]
pub enum TailModel {
    /// `phi(n) = 0` for `n >= len`.
    FiniteSupport { len: usize },
    /// `|phi(n)| <= bound * ratio^n` for `n >= onset`.
    Geometric { ratio: f64, bound: f64, onset: usize },
    /// `phi(n) - c_plus - c_minus (-1)^n` obeys `remainder`.
    ParityLimit {
        c_plus: Complex64,
        c_minus: Complex64,
        remainder: Box<TailModel>,
    },
    /// Supported on `{2^k : k >= 1}` with `|phi(2^k)| <= scale / (k 2^k)`.
    /// Enough for the `(n+1)^2` series, not for trace-class certification.
    Lacunary { scale: f64 },
    Undeclared,
}

impl TailModel {
    pub fn geometric(ratio: f64, bound: f64) -> Self {
        TailModel::Geometric {
            ratio,
            bound,
            onset: 0,
        }
    }

    /// Whether the model certifies that the Hankel matrix is trace class.
    pub fn certifies_trace_class(&self) -> bool {
        match self {
            TailModel::FiniteSupport { .. } | TailModel::Geometric { .. } => true,
            TailModel::ParityLimit { remainder, .. } => remainder.certifies_trace_class(),
            TailModel::Lacunary { .. } | TailModel::Undeclared => false,
        }
    }

    fn scaled(&self, alpha: Complex64) -> TailModel {
        let a = alpha.norm();
        match self {
            TailModel::FiniteSupport { len } => TailModel::FiniteSupport { len: *len },
            TailModel::Geometric {
                ratio,
                bound,
                onset,
            } => TailModel::Geometric {
                ratio: *ratio,
                bound: bound * a,
                onset: *onset,
            },
            TailModel::ParityLimit {
                c_plus,
                c_minus,
                remainder,
            } => TailModel::ParityLimit {
                c_plus: c_plus * alpha,
                c_minus: c_minus * alpha,
                remainder: Box::new(remainder.scaled(alpha)),
            },
            TailModel::Lacunary { scale } => TailModel::Lacunary { scale: scale * a },
            TailModel::Undeclared => TailModel::Undeclared,
        }
    }
}

type EvalFn = dyn Fn(usize) -> Complex64 + Send + Sync;
type BatchFn = dyn Fn(usize) -> Vec<Complex64> + Send + Sync;

/// A sequence `phi: N0 -> C` together with its declared tail model.
#[derive(Clone)]
pub struct RadialSymbol {
    eval: Arc<EvalFn>,
    batch: Option<Arc<BatchFn>>,
    tail: TailModel,
    label: String,
}

impl fmt::Debug for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialSymbol")
            .field("label", &self.label)
            .field("tail", &self.tail)
            .finish()
    }
}

impl RadialSymbol {
    /// Builds a symbol and spot-checks the declared tail at 32 indices.
    pub fn new(
        label: impl Into<String>,
        tail: TailModel,
        eval: impl Fn(usize) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let sym = Self::new_unchecked(label, tail, eval);
        sym.spot_check(&sym.tail, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?;
        Ok(sym)
    }

    pub(crate) fn new_unchecked(
        label: impl Into<String>,
        tail: TailModel,
        eval: impl Fn(usize) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            batch: None,
            tail,
            label: label.into(),
        }
    }

    /// Attaches a faster evaluator for `phi(0..count)`; it must agree with `eval`.
    pub fn with_batch(mut self, batch: impl Fn(usize) -> Vec<Complex64> + Send + Sync + 'static) -> Self {
        self.batch = Some(Arc::new(batch));
        self
    }

    /// Finite list of values; beyond the list the symbol is
    /// `c_plus + c_minus (-1)^n` (zero when no limits are given).
    pub fn explicit(values: Vec<Complex64>, limits: Option<(Complex64, Complex64)>) -> Result<Self> {
        let len = values.len();
        let finite = TailModel::FiniteSupport { len };
        let (cp, cm) = limits.unwrap_or((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        let tail = if limits.is_some() {
            TailModel::ParityLimit {
                c_plus: cp,
                c_minus: cm,
                remainder: Box::new(finite),
            }
        } else {
            finite
        };
        let label = format!("explicit[{len}]");
        Self::new(label, tail, move |n| {
            if n < len {
                values[n]
            } else {
                cp + if n % 2 == 0 { cm } else { -cm }
            }
        })
    }

    /// Finite list of values declared to sit under a geometric envelope.
    pub fn explicit_geometric(values: Vec<Complex64>, ratio: f64, bound: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) || !(bound >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "geometric tail needs 0 <= ratio < 1 and bound >= 0, got ({ratio}, {bound})"
            )));
        }
        let len = values.len();
        for (n, v) in values.iter().enumerate() {
            let b = bound * ratio.powi(n as i32);
            if v.norm() > b * (1.0 + SPOT_SLACK) + f64::MIN_POSITIVE {
                return Err(Error::TailViolation {
                    index: n,
                    value: v.norm(),
                    bound: b,
                });
            }
        }
        Self::new(
            format!("explicit[{len}]"),
            TailModel::geometric(ratio, bound),
            move |n| values.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0)),
        )
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new_unchecked(
            "constant",
            TailModel::ParityLimit {
                c_plus: c,
                c_minus: Complex64::new(0.0, 0.0),
                remainder: Box::new(TailModel::FiniteSupport { len: 0 }),
            },
            move |_| c,
        )
    }

    /// `phi(n) = s^n` for `|s| < 1`.
    pub fn power(s: Complex64) -> Result<Self> {
        let r = s.norm();
        if r >= 1.0 {
            return Err(Error::InvalidArgument(format!("|s| = {r} must be below 1")));
        }
        Self::new(format!("power({s})"), TailModel::geometric(r, 1.0), move |n| {
            s.powi(n as i32)
        })
    }

    pub fn eval(&self, n: usize) -> Complex64 {
        (self.eval)(n)
    }

    pub fn values(&self, count: usize) -> Vec<Complex64> {
        match &self.batch {
            Some(b) => b(count),
            None => (0..count).map(|n| self.eval(n)).collect(),
        }
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, alpha: Complex64) -> RadialSymbol {
        let inner = self.eval.clone();
        let batch = self.batch.clone().map(|b| {
            let f: Arc<BatchFn> = Arc::new(move |count| b(count).into_iter().map(|v| v * alpha).collect());
            f
        });
        RadialSymbol {
            eval: Arc::new(move |n| inner(n) * alpha),
            batch,
            tail: self.tail.scaled(alpha),
            label: format!("{alpha}*{}", self.label),
        }
    }

    fn spot_check(&self, model: &TailModel, cp: Complex64, cm: Complex64) -> Result<()> {
        let rem = |n: usize| self.eval(n) - cp - if n.is_multiple_of(2) { cm } else { -cm };
        let fail = |index: usize, value: f64, bound: f64| Err(Error::TailViolation { index, value, bound });
        match model {
            TailModel::FiniteSupport { len } => {
                for k in 0..SPOT_CHECKS {
                    let n = len + k * (k + 1) / 2;
                    let v = rem(n).norm();
                    let scale = cp.norm() + cm.norm();
                    if v > SPOT_SLACK * scale {
                        return fail(n, v, 0.0);
                    }
                }
            }
            TailModel::Geometric {
                ratio,
                bound,
                onset,
            } => {
                if !(0.0..1.0).contains(ratio) || !(*bound >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "geometric tail needs 0 <= ratio < 1 and bound >= 0, got ({ratio}, {bound})"
                    )));
                }
                for k in 0..SPOT_CHECKS {
                    let n = onset + k * (k + 1) / 2;
                    let b = bound * ratio.powi(n as i32);
                    let v = rem(n).norm();
                    let scale = cp.norm() + cm.norm();
                    if v > b * (1.0 + SPOT_SLACK) + SPOT_SLACK * scale + f64::MIN_POSITIVE {
                        return fail(n, v, b);
                    }
                }
            }
            TailModel::ParityLimit {
                c_plus,
                c_minus,
                remainder,
            } => return self.spot_check(remainder, *c_plus, *c_minus),
            TailModel::Lacunary { scale } => {
                for k in 1..=SPOT_CHECKS {
                    let n = 1usize << k;
                    let b = scale / (k as f64 * n as f64);
                    let v = self.eval(n).norm();
                    if v > b * (1.0 + SPOT_SLACK) {
                        return fail(n, v, b);
                    }
                    let off = self.eval(n + 1).norm();
                    if off != 0.0 {
                        return fail(n + 1, off, 0.0);
                    }
                }
            }
            TailModel::Undeclared => {}
        }
        Ok(())
    }
}

/// Second difference `h_d = phi(d) - phi(d + 2)`.
fn diff2(sym: &RadialSymbol, d: usize) -> Complex64 {
    sym.eval(d) - sym.eval(d + 2)
}

/// Upper bound on `sum_{d >= m} w(d) |h_d|` with `w(d) = d + 1` when
/// `weighted`, else 1. Infinite when the model cannot certify it.
fn hankel_tail_sum(sym: &RadialSymbol, model: &TailModel, m: usize, weighted: bool) -> f64 {
    let w = |d: usize| if weighted { (d + 1) as f64 } else { 1.0 };
    match model {
        TailModel::FiniteSupport { len } => (m..*len).map(|d| w(d) * diff2(sym, d).norm()).sum(),
        TailModel::Geometric {
            ratio,
            bound,
            onset,
        } => {
            let exact: f64 = (m..*onset).map(|d| w(d) * diff2(sym, d).norm()).sum();
            let start = m.max(*onset);
            let r = *ratio;
            let rs = r.powi(start as i32);
            let series = if weighted {
                rs * ((start as f64 + 1.0) / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)))
            } else {
                rs / (1.0 - r)
            };
            exact + bound * (1.0 + r * r) * series
        }
        TailModel::ParityLimit { remainder, .. } => hankel_tail_sum(sym, remainder, m, weighted),
        TailModel::Lacunary { .. } | TailModel::Undeclared => f64::INFINITY,
    }
}

/// Whether certified bounds are demanded from `build_hankel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    Required,
    Optional,
}

#[derive(Debug, Clone)]
pub struct HankelMatrix {
    pub q: Degree,
    pub n: usize,
    pub entries: CMatrix,
    /// `h_d` for `0 <= d <= 2n - 2`.
    pub antidiagonals: Vec<Complex64>,
    /// Bound on the trace norm of what truncation discards: of `H` for
    /// infinite `q`, of `H'` for finite `q`. Infinite when uncertified.
    pub tail_bound: f64,
    /// Bound on `sum_{d >= 2n - 1} |h_d|`, the unseen part of the diagonal series.
    pub diagonal_tail: f64,
}

pub fn build_hankel(sym: &RadialSymbol, q: Degree, n: usize, cert: Certification) -> Result<HankelMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation size must be at least 1".into()));
    }
    let certified = sym.tail().certifies_trace_class();
    if !certified && cert == Certification::Required {
        return Err(Error::UndeclaredTail);
    }
    let phi = sym.values(2 * n + 1);
    let antidiagonals: Vec<Complex64> = (0..2 * n - 1).map(|d| phi[d] - phi[d + 2]).collect();
    let entries = CMatrix::from_fn(n, n, |i, j| antidiagonals[i + j]);
    let (tail_bound, diagonal_tail) = if certified {
        (
            resolvent_tail_bound(sym, q, n, &antidiagonals),
            hankel_tail_sum(sym, sym.tail(), 2 * n - 1, false),
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(HankelMatrix {
        q,
        n,
        entries,
        antidiagonals,
        tail_bound,
        diagonal_tail,
    })
}

/// Trace-norm bound for the part of `H` (or `H'`) outside the leading
/// `n x n` window, via entrywise `l1`: `||H - P H P||_1 <= T(n)` with
/// `T(m) = sum_{d >= m} (d + 1)|h_d|`, and for finite `q`
/// `||H' - P H' P||_1 <= (1 - 1/q) [sum_{k < n} q^-k T(n - k) + q^-n T(0) / (1 - 1/q)]`.
fn resolvent_tail_bound(sym: &RadialSymbol, q: Degree, n: usize, antidiagonals: &[Complex64]) -> f64 {
    let t_n = hankel_tail_sum(sym, sym.tail(), n, true);
    match q {
        Degree::Infinite => t_n,
        Degree::Finite(q) => {
            let qf = q as f64;
            // t[m] = T(m) for 0 <= m <= n
            let mut t = vec![0.0; n + 1];
            t[n] = t_n;
            for m in (0..n).rev() {
                t[m] = t[m + 1] + (m + 1) as f64 * antidiagonals[m].norm();
            }
            let mut acc = 0.0;
            let mut w = 1.0;
            for k in 0..n {
                acc += w * t[n - k];
                w /= qf;
            }
            (1.0 - 1.0 / qf) * acc + w * t[0]
        }
    }
}

/// `H' = (1 - 1/q)(I - tau/q)^-1 H` on the truncation window:
/// `h'[i][j] = (1 - 1/q) sum_{k <= min(i,j)} q^-k h[i-k][j-k]`.
pub fn apply_resolvent(h: &CMatrix, q: u32) -> Result<CMatrix> {
    if q < 2 {
        return Err(Error::InvalidDegree(q as u64));
    }
    let inv = 1.0 / q as f64;
    let (r, c) = (h.rows(), h.cols());
    let mut g = h.clone();
    for i in 1..r {
        for j in 1..c {
            let prev = g[(i - 1, j - 1)];
            g[(i, j)] += prev * inv;
        }
    }
    Ok(g.scale(Complex64::new(1.0 - inv, 0.0)))
}

/// `phi(n) = c_plus + c_minus (-1)^n + psi(n)`.
#[derive(Debug, Clone)]
pub struct ParityDecomposition {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub psi: RadialSymbol,
    /// Bound on `|c_plus - exact|` and on `|c_minus - exact|`.
    pub error: f64,
}

/// Limits along even and odd indices from the diagonal series
/// `lim phi(2i) = phi(0) - sum h_{ii}` and `lim phi(2i+1) = phi(1) - sum h_{i+1,i}`.
pub fn extract_parity(sym: &RadialSymbol, h: &HankelMatrix, tol: f64) -> Result<ParityDecomposition> {
    let a = &h.antidiagonals;
    let sum_even = |upto: usize| -> Complex64 { a.iter().step_by(2).take(upto).sum() };
    let sum_odd = |upto: usize| -> Complex64 { a.iter().skip(1).step_by(2).take(upto).sum() };
    let n = h.n;
    let even = sum_even(n);
    let odd = sum_odd(n.saturating_sub(1));
    let error = if h.diagonal_tail.is_finite() {
        h.diagonal_tail
    } else {
        // Cauchy criterion on the visible half of each series.
        let half = (n / 2).max(1);
        let inc = (even - sum_even(half)).norm().max((odd - sum_odd(half.saturating_sub(1))).norm());
        if inc > tol {
            return Err(Error::DivergentDiagonals {
                tolerance: tol,
                increment: inc,
            });
        }
        inc
    };
    let lim_even = sym.eval(0) - even;
    let lim_odd = sym.eval(1) - odd;
    let c_plus = (lim_even + lim_odd) * 0.5;
    let c_minus = (lim_even - lim_odd) * 0.5;
    let psi_tail = match sym.tail() {
        TailModel::ParityLimit { remainder, .. } => (**remainder).clone(),
        other => other.clone(),
    };
    let inner = sym.eval.clone();
    let psi = RadialSymbol::new_unchecked(format!("psi({})", sym.label), psi_tail, move |k| {
        inner(k) - c_plus - if k % 2 == 0 { c_minus } else { -c_minus }
    });
    Ok(ParityDecomposition {
        c_plus,
        c_minus,
        psi,
        error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurNormReport {
    pub q: Degree,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub hankel_term: f64,
    pub total: f64,
    pub truncation_n: usize,
    pub certified_error: f64,
    /// False when the symbol's tail is undeclared and the caller accepted an estimate.
    pub certified: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub start_n: usize,
    pub max_n: usize,
    /// Cap for symbols whose tail cannot be certified.
    pub uncertified_max_n: usize,
    pub spectral_tol: f64,
    pub allow_uncertified: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            start_n: 32,
            max_n: 4096,
            uncertified_max_n: 1024,
            spectral_tol: spectral::DEFAULT_TOL,
            allow_uncertified: false,
        }
    }
}

/// Trace norm of the truncated Hankel term at size `n`.
pub fn truncated_hankel_term(sym: &RadialSymbol, q: Degree, n: usize, tol: f64) -> Result<(HankelMatrix, f64)> {
    let h = build_hankel(sym, q, n, Certification::Optional)?;
    let norm = match q {
        Degree::Infinite => spectral::trace_norm(&h.entries, tol)?,
        Degree::Finite(qq) => spectral::trace_norm(&apply_resolvent(&h.entries, qq)?, tol)?,
    };
    Ok((h, norm))
}

pub fn schur_norm(sym: &RadialSymbol, q: Degree, target_err: f64) -> Result<SchurNormReport> {
    schur_norm_with(sym, q, target_err, NormOptions::default())
}

pub fn schur_norm_with(sym: &RadialSymbol, q: Degree, target_err: f64, opts: NormOptions) -> Result<SchurNormReport> {
    if let Degree::Finite(qq) = q {
        if qq < 2 {
            return Err(Error::InvalidDegree(qq as u64));
        }
    }
    if !(target_err > 0.0) {
        return Err(Error::InvalidArgument(format!("target error must be positive, got {target_err}")));
    }
    let certified = sym.tail().certifies_trace_class();
    if !certified && !opts.allow_uncertified {
        return Err(Error::UndeclaredTail);
    }
    let cap = if certified { opts.max_n } else { opts.uncertified_max_n };
    let mut schedule = Vec::new();
    let mut n = opts.start_n.max(1);
    while n <= cap {
        schedule.push(n);
        n *= 2;
    }
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty truncation schedule".into()));
    }

    // Rounds whose tail bound alone exceeds the target cannot stop the loop.
    let mut first = 0;
    if certified {
        let tails: Vec<f64> = schedule
            .iter()
            .map(|&n| {
                let phi = sym.values(2 * n + 1);
                let a: Vec<Complex64> = (0..2 * n - 1).map(|d| phi[d] - phi[d + 2]).collect();
                resolvent_tail_bound(sym, q, n, &a)
            })
            .collect();
        match tails.iter().position(|&t| t <= target_err) {
            Some(k) => first = k.saturating_sub(1),
            None => {
                return Err(Error::NoConvergence {
                    what: "Hankel truncation",
                    iterations: *schedule.last().unwrap(),
                    residual: *tails.last().unwrap(),
                })
            }
        }
    }

    let mut sizes = Vec::new();
    let mut norms = Vec::new();
    let mut prev: Option<f64> = None;
    for &n in &schedule[first..] {
        let (h, term) = truncated_hankel_term(sym, q, n, opts.spectral_tol)?;
        sizes.push(n);
        norms.push(term);
        if let Some(p) = prev {
            let diff = (term - p).abs();
            let tail = if certified { h.tail_bound } else { 0.0 };
            if diff + tail <= target_err {
                let parity = extract_parity(sym, &h, target_err)?;
                let spectral_err = opts.spectral_tol * n as f64;
                let (hankel_err, parity_err) = if certified {
                    (h.tail_bound, 2.0 * parity.error)
                } else {
                    (diff, 2.0 * parity.error)
                };
                let total = parity.c_plus.norm() + parity.c_minus.norm() + term;
                return Ok(SchurNormReport {
                    q,
                    c_plus: parity.c_plus,
                    c_minus: parity.c_minus,
                    hankel_term: term,
                    total,
                    truncation_n: n,
                    certified_error: hankel_err + spectral_err + parity_err,
                    certified,
                });
            }
        }
        prev = Some(term);
    }
    if certified {
        Err(Error::NoConvergence {
            what: "Hankel truncation",
            iterations: *sizes.last().unwrap(),
            residual: (norms[norms.len() - 1] - norms[norms.len().saturating_sub(2)]).abs(),
        })
    } else {
        let block_lower_bounds = if matches!(sym.tail(), TailModel::Lacunary { .. }) {
            sizes.iter().map(|&n| counterexample_block_lower_bound(n)).collect()
        } else {
            Vec::new()
        };
        Err(Error::DivergentTraceNorm {
            sizes,
            trace_norms: norms,
            block_lower_bounds,
        })
    }
}

/// `sum_{k>=K} 1/k^2` by Euler-Maclaurin; error below `1/(42 K^7)`.
fn zeta2_tail(k: f64) -> f64 {
    1.0 / k + 0.5 / (k * k) + 1.0 / (6.0 * k.powi(3)) - 1.0 / (30.0 * k.powi(5))
}

const MA_TARGET: f64 = 1e-12;

/// `(sum (n+1)^2 |phi(n)|^2)^(1/2)`, the upper bound for the multiplier norm.
pub fn ma_upper_bound(sym: &RadialSymbol) -> Result<f64> {
    ma_series(sym, sym.tail()).map(f64::sqrt)
}

fn ma_series(sym: &RadialSymbol, model: &TailModel) -> Result<f64> {
    let term = |n: usize| ((n + 1) as f64).powi(2) * sym.eval(n).norm_sqr();
    match model {
        TailModel::FiniteSupport { len } => Ok((0..*len).map(term).sum()),
        TailModel::Geometric {
            ratio,
            bound,
            onset,
        } => {
            let x = ratio * ratio;
            let tail_from = |k: usize| {
                let a = (k + 1) as f64;
                bound * bound
                    * x.powi(k as i32)
                    * (a * a / (1.0 - x) + 2.0 * a * x / (1.0 - x).powi(2) + x * (1.0 + x) / (1.0 - x).powi(3))
            };
            let mut k = *onset;
            let mut sum: f64 = (0..k).map(term).sum();
            while tail_from(k) > MA_TARGET {
                sum += term(k);
                k += 1;
                if k > 50_000_000 {
                    return Err(Error::DivergentSeries);
                }
            }
            Ok(sum)
        }
        TailModel::ParityLimit {
            c_plus,
            c_minus,
            remainder,
        } => {
            if c_plus.norm() > 0.0 || c_minus.norm() > 0.0 {
                Err(Error::DivergentSeries)
            } else {
                ma_series(sym, remainder)
            }
        }
        TailModel::Lacunary { scale } => {
            const K: u32 = 40;
            let mut sum = 0.0;
            for k in 1..=K {
                sum += term(1usize << k);
            }
            // (2^k + 1)^2 / (k^2 4^k) = (1 + 2^{1-k} + 4^{-k}) / k^2 for k > K.
            let kk = (K + 1) as f64;
            let main = zeta2_tail(kk);
            let small = 3.0 * 2f64.powi(-(K as i32)) / (kk * kk);
            Ok(sum + scale * scale * (main + small))
        }
        TailModel::Undeclared => Err(Error::DivergentSeries),
    }
}

/// `phi(2^k) = 1/(k 2^k)` for `k >= 1`, zero elsewhere: bounded by the
/// `(n+1)^2` series yet not a Schur multiplier.
pub fn lacunary_counterexample() -> RadialSymbol {
    RadialSymbol::new_unchecked("lacunary", TailModel::Lacunary { scale: 1.0 }, |n| {
        if n >= 2 && n.is_power_of_two() {
            let k = n.trailing_zeros() as f64;
            Complex64::new(1.0 / (k * n as f64), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `sum_{k >= 3, 5 * 2^(k-3) <= n - 1} 1/(4k)`, a lower bound for the trace
/// norm of the `n x n` truncation of the lacunary Hankel matrix.
pub fn counterexample_block_lower_bound(n: usize) -> f64 {
    let mut total = 0.0;
    let mut k = 3u32;
    while k < 60 && 5usize << (k - 3) < n {
        total += 1.0 / (4.0 * k as f64);
        k += 1;
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub norm_q: f64,
    pub norm_inf: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `((q-1)/(q+1)) ||phi||_inf <= ||phi||_q <= ||phi||_inf`.
pub fn subtree_sandwich_check(sym: &RadialSymbol, q: u32, target_err: f64) -> Result<SandwichReport> {
    let rq = schur_norm(sym, Degree::finite(q as u64)?, target_err)?;
    let ri = schur_norm(sym, Degree::Infinite, target_err)?;
    let slack = rq.certified_error + ri.certified_error;
    let f = (q as f64 - 1.0) / (q as f64 + 1.0);
    let holds = f * ri.total <= rq.total + slack && rq.total <= ri.total + slack;
    Ok(SandwichReport {
        norm_q: rq.total,
        norm_inf: ri.total,
        slack,
        holds,
    })
}
