//! JSON symbol specifications.
//!
//! ```json
//! {"kind": "explicit", "values": [1, {"re": 0.5, "im": 0.1}],
//!  "tail": {"type": "finite"}, "limits": {"c_plus": 0, "c_minus": 0.5}}
//! {"kind": "explicit", "values": [1, 0.5, 0.25], "tail": {"type": "geometric", "ratio": 0.5, "bound": 1}}
//! {"kind": "spherical", "q": 3, "s": {"re": 0, "im": 0.4}}
//! {"kind": "spherical", "q": "inf", "s": [0, 0.5]}
//! {"kind": "spherical", "q": 3, "z": {"re": 0.3, "im": 0}}
//! {"kind": "lacunary"}
//! ```

use num_complex::Complex64;
use serde::Deserialize;
use treeschur::radial::{lacunary_counterexample, RadialSymbol};
use treeschur::spherical::{spherical_symbol, SphericalParam};
use treeschur::{Degree, Error, Result};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
    Object {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl ComplexSpec {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexSpec::Real(x) => Complex64::new(x, 0.0),
            ComplexSpec::Pair([re, im]) | ComplexSpec::Object { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Int(u64),
    Text(String),
}

impl DegreeSpec {
    pub fn degree(&self) -> Result<Degree> {
        match self {
            DegreeSpec::Int(q) => Degree::finite(*q),
            DegreeSpec::Text(s) => s.parse(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    Finite,
    Geometric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    #[serde(rename = "type")]
    kind: TailKind,
    ratio: Option<f64>,
    bound: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    c_plus: Option<ComplexSpec>,
    c_minus: Option<ComplexSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolSpec {
    Explicit {
        values: Vec<ComplexSpec>,
        tail: Option<TailSpec>,
        limits: Option<LimitsSpec>,
    },
    Spherical {
        q: DegreeSpec,
        s: Option<ComplexSpec>,
        z: Option<ComplexSpec>,
    },
    Lacunary,
}

pub fn parse(text: &str) -> Result<SymbolSpec> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed symbol specification: {e}")))
}

impl SymbolSpec {
    pub fn build(&self) -> Result<RadialSymbol> {
        match self {
            SymbolSpec::Explicit { values, tail, limits } => {
                let values: Vec<Complex64> = values.iter().map(|v| v.value()).collect();
                let limits = limits.as_ref().map(|l| {
                    let zero = ComplexSpec::Real(0.0);
                    (l.c_plus.unwrap_or(zero).value(), l.c_minus.unwrap_or(zero).value())
                });
                match tail.as_ref().map(|t| &t.kind) {
                    None | Some(TailKind::Finite) => RadialSymbol::explicit(values, limits),
                    Some(TailKind::Geometric) => {
                        let t = tail.as_ref().expect("matched Some");
                        if limits.is_some() {
                            return Err(Error::InvalidArgument(
                                "limits combine only with a finite tail".into(),
                            ));
                        }
                        let (Some(r), Some(c)) = (t.ratio, t.bound) else {
                            return Err(Error::InvalidArgument("geometric tail needs ratio and bound".into()));
                        };
                        RadialSymbol::explicit_geometric(values, r, c)
                    }
                }
            }
            SymbolSpec::Spherical { .. } => spherical_symbol(self.spherical_param()?.expect("spherical spec")),
            SymbolSpec::Lacunary => Ok(lacunary_counterexample()),
        }
    }
}

impl SymbolSpec {
    /// The spherical parameter of a `"spherical"` spec, `None` for other kinds.
    pub fn spherical_param(&self) -> Result<Option<SphericalParam>> {
        let SymbolSpec::Spherical { q, s, z } = self else {
            return Ok(None);
        };
        let q = q.degree()?;
        let param = match (s, z, q) {
            (Some(s), None, _) => SphericalParam::from_s(q, s.value()),
            (None, Some(z), Degree::Finite(qq)) => SphericalParam::from_z(qq, z.value())?,
            (None, Some(_), Degree::Infinite) => return Err(Error::InvalidArgument("the z parameter needs a finite q".into())),
            _ => return Err(Error::InvalidArgument("give exactly one of s and z".into())),
        };
        Ok(Some(param))
    }
}

/// Accepts `"re,im"`, `"0.4i"`, `"0.3-0.2i"`, `"-i"` or a real number.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || Error::InvalidArgument(format!("cannot parse complex number {text:?}"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im))
}
