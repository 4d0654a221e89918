//! A fixed collection of symbols with certified tails, shared by tests,
//! the acceptance suite and the `verify` command.

use num_complex::Complex64;

use crate::radial::{RadialSymbol, TailModel};
use crate::spherical::{spherical_symbol, SphericalParam};
use crate::Degree;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spherical(q: Degree, s: Complex64) -> RadialSymbol {
    spherical_symbol(SphericalParam::from_s(q, s))
        .expect("corpus point lies inside the ellipse")
        .with_label(format!("spherical(q={q}, s={s})"))
}

/// Twelve symbols whose Hankel matrices are certified trace class.
pub fn trace_class_corpus() -> Vec<RadialSymbol> {
    let two_atoms = RadialSymbol::new("0.5^n + (-0.5)^n", TailModel::geometric(0.5, 2.0), |n| {
        c(0.5f64.powi(n as i32) * (1.0 + if n % 2 == 0 { 1.0 } else { -1.0 }), 0.0)
    })
    .expect("declared tail holds");
    vec![
        RadialSymbol::constant(c(1.0, 0.0)),
        RadialSymbol::explicit(vec![], Some((c(0.0, 0.0), c(1.0, 0.0))))
            .expect("valid")
            .with_label("(-1)^n"),
        RadialSymbol::power(c(0.5, 0.0)).expect("valid"),
        RadialSymbol::new("(n+1) 0.6^n", TailModel::geometric(0.8, 1.8), |n| c((n + 1) as f64 * 0.6f64.powi(n as i32), 0.0))
            .expect("declared tail holds"),
        two_atoms,
        RadialSymbol::explicit(vec![c(1.0, 0.0), c(0.5, 0.0), c(-0.25, 0.0), c(0.1, 0.2)], None).expect("valid"),
        RadialSymbol::explicit(
            vec![c(2.0, 0.0), c(0.5, -0.5), c(1.0, 0.0), c(0.0, 0.0)],
            Some((c(0.5, 0.0), c(0.25, 0.0))),
        )
        .expect("valid"),
        spherical(Degree::Infinite, c(0.0, 0.5)),
        spherical(Degree::Infinite, c(0.3, -0.4)),
        spherical(Degree::Finite(2), c(0.3, 0.1)),
        spherical(Degree::Finite(3), c(0.0, 0.4)),
        spherical(Degree::Finite(5), c(0.6, 0.0)),
    ]
}
