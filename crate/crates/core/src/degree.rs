use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tree degree parameter: every vertex has `q + 1` neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    Finite(u32),
    Infinite,
}

impl Degree {
    pub fn finite(q: u64) -> Result<Self> {
        if q < 2 || q > u32::MAX as u64 {
            return Err(Error::InvalidDegree(q));
        }
        Ok(Degree::Finite(q as u32))
    }

    pub fn as_finite(self) -> Option<u32> {
        match self {
            Degree::Finite(q) => Some(q),
            Degree::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Degree::Infinite)
    }

    /// `(q + 1) / (q - 1)`, taken as 1 at infinity.
    pub fn ellipse_factor(self) -> f64 {
        match self {
            Degree::Finite(q) => (q as f64 + 1.0) / (q as f64 - 1.0),
            Degree::Infinite => 1.0,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(q) => write!(f, "{q}"),
            Degree::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Degree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Degree::Infinite);
        }
        let q: u64 = t
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse degree {s:?}")))?;
        Degree::finite(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        assert_eq!("inf".parse::<Degree>().unwrap(), Degree::Infinite);
        assert_eq!("3".parse::<Degree>().unwrap(), Degree::Finite(3));
        assert!(matches!("1".parse::<Degree>(), Err(Error::InvalidDegree(1))));
        assert!(matches!("0".parse::<Degree>(), Err(Error::InvalidDegree(0))));
        assert!("x".parse::<Degree>().is_err());
    }

    #[test]
    fn ellipse_factor_values() {
        assert_eq!(Degree::Finite(3).ellipse_factor(), 2.0);
        assert_eq!(Degree::Infinite.ellipse_factor(), 1.0);
    }
}
