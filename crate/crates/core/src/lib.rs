//! Schur norms of radial kernels on homogeneous trees.
//!
//! A radial function on the homogeneous tree of degree `q + 1` is described by
//! a sequence `phi(n)` indexed by distance. Its Schur multiplier norm equals
//! `|c+| + |c-|` plus the trace norm of a Hankel operator built from the
//! second differences of `phi`. The modules below compute that norm and
//! cross-check it against closed forms, explicit factorizations on finite
//! tree balls, a disc integral representation and the p-adic lattice model.

pub mod corpus;
mod degree;
pub mod error;
pub mod padic;
pub mod peller;
pub mod radial;
pub mod spectral;
pub mod spherical;
pub mod tree;

pub use degree::Degree;
pub use error::{Error, Result};
pub use num_complex::Complex64;
