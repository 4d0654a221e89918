use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("iteration did not converge: {what} (reached {iterations} iterations, residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree q = {0} is not allowed (need q >= 2 or infinity)")]
    InvalidDegree(u64),
    #[error("symbol has no declared tail model; a certified bound is impossible")]
    UndeclaredTail,
    #[error("symbol violates its geometric tail bound at n = {index}: |phi(n)| = {value:.6e} > {bound:.6e}")]
    TailViolation { index: usize, value: f64, bound: f64 },
    #[error("diagonal series do not converge at tolerance {tolerance:.3e} (increment {increment:.3e})")]
    DivergentDiagonals { tolerance: f64, increment: f64 },
    #[error("truncated trace norms keep growing; not a Schur multiplier at certified tolerance")]
    DivergentTraceNorm {
        sizes: Vec<usize>,
        trace_norms: Vec<f64>,
        block_lower_bounds: Vec<f64>,
    },
    #[error("series does not converge under the declared tail model")]
    DivergentSeries,
    #[error("tree ball would hold {requested} nodes, above the cap of {cap}")]
    SizeCap { requested: usize, cap: usize },
    #[error("climb orbit of node {node} leaves the stored chain after {steps} steps")]
    OrbitEscapesBall { node: usize, steps: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivideByZero,
    #[error("p-adic precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("p-adic operands have different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
}

pub type Result<T> = std::result::Result<T, Error>;
