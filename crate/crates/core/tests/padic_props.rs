use num_complex::Complex64;
use proptest::prelude::*;
use treeschur::padic::{correspondence_check, group_spherical, lattice_distance, mautner_spherical, PAdic, PMatrix2};
use treeschur::spherical::spherical_symbol_closed_form;
use treeschur::Error;

const PREC: u32 = 40;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

/// `q^k num / den` with `num, den` up to a million.
fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-1_000_000i64..=1_000_000, 1i64..=1_000_000)
}

fn padic(q: u64, (n, d): (i64, i64), k: i32) -> PAdic {
    let x = PAdic::from_rational(q, n, d, PREC).unwrap();
    x.mul(&PAdic::power_of_q(q, k as i64, PREC).unwrap()).unwrap()
}

fn matrix(q: u64, e: [(i64, i64); 4]) -> Option<PMatrix2> {
    match PMatrix2::from_rationals(q, e, PREC) {
        Ok(m) => Some(m),
        Err(Error::InvalidArgument(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

fn entries() -> impl Strategy<Value = [(i64, i64); 4]> {
    [(-60i64..=60, 1i64..=60), (-60i64..=60, 1i64..=60), (-60i64..=60, 1i64..=60), (-60i64..=60, 1i64..=60)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ultrametric_inequality(q in prime(), a in rational(), b in rational(), k in -3i32..4, l in -3i32..4) {
        let (x, y) = (padic(q, a, k), padic(q, b, l));
        let s = x.add(&y).unwrap();
        prop_assert!(s.norm() <= x.norm().max(y.norm()));
        if x.valuation() != y.valuation() && !x.is_zero() && !y.is_zero() {
            prop_assert_eq!(s.norm(), x.norm().max(y.norm()));
        }
    }

    #[test]
    fn norm_is_multiplicative(q in prime(), a in rational(), b in rational(), k in -3i32..4) {
        let (x, y) = (padic(q, a, k), padic(q, b, 0));
        let p = x.mul(&y).unwrap();
        match (x.valuation(), y.valuation()) {
            (Some(u), Some(v)) => {
                prop_assert_eq!(p.valuation(), Some(u + v));
                prop_assert!((p.norm() - x.norm() * y.norm()).abs() <= 1e-15 * p.norm());
            }
            _ => prop_assert!(p.is_zero()),
        }
    }

    #[test]
    fn ring_axioms(q in prime(), a in rational(), b in rational(), c in rational()) {
        let (x, y, z) = (padic(q, a, 0), padic(q, b, 1), padic(q, c, -1));
        let l = x.add(&y).unwrap().add(&z).unwrap();
        let r = x.add(&y.add(&z).unwrap()).unwrap();
        prop_assert!(l.approx_eq(&r).unwrap());
        let l = x.mul(&y.add(&z).unwrap()).unwrap();
        let r = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert!(l.approx_eq(&r).unwrap());
        prop_assert!(x.mul(&y).unwrap().approx_eq(&y.mul(&x).unwrap()).unwrap());
    }

    #[test]
    fn rationals_round_trip(q in prime(), (n, d) in rational()) {
        let x = PAdic::from_rational(q, n, d, PREC).unwrap();
        let den = PAdic::from_rational(q, d, 1, PREC).unwrap();
        let num = PAdic::from_rational(q, n, 1, PREC).unwrap();
        prop_assert!(x.mul(&den).unwrap().approx_eq(&num).unwrap());
        if !x.is_zero() {
            let digits = x.digits();
            prop_assert!(digits[0] >= 1 && digits[0] < q);
            prop_assert_eq!(x.norm(), (q as f64).powi(-x.valuation().unwrap() as i32));
        }
    }

    #[test]
    fn distance_is_left_invariant(q in prime(), g in entries(), a in entries(), b in entries()) {
        let (Some(g), Some(a), Some(b)) = (matrix(q, g), matrix(q, a), matrix(q, b)) else {
            return Ok(());
        };
        let d = lattice_distance(&a, &b).unwrap();
        let moved = lattice_distance(&g.mul(&a).unwrap(), &g.mul(&b).unwrap()).unwrap();
        prop_assert_eq!(d, moved);
        prop_assert_eq!(lattice_distance(&b, &a).unwrap(), d);
    }

    #[test]
    fn distance_ignores_scalars(q in prime(), a in entries(), b in entries(), k in -2i64..=2) {
        let (Some(a), Some(b)) = (matrix(q, a), matrix(q, b)) else {
            return Ok(());
        };
        let s = PAdic::power_of_q(q, k, PREC).unwrap();
        prop_assert_eq!(lattice_distance(&a, &b.scale(&s).unwrap()).unwrap(), lattice_distance(&a, &b).unwrap());
    }

    #[test]
    fn triangle_inequality(q in prime(), a in entries(), b in entries(), c in entries()) {
        let (Some(a), Some(b), Some(c)) = (matrix(q, a), matrix(q, b), matrix(q, c)) else {
            return Ok(());
        };
        let ab = lattice_distance(&a, &b).unwrap();
        let bc = lattice_distance(&b, &c).unwrap();
        let ac = lattice_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
        // the tree is bipartite: distances around a triangle sum to an even number
        prop_assert_eq!((ab + bc + ac) % 2, 0);
    }

    #[test]
    fn mautner_matches_tree_spherical(q in prime(), re in 0.02f64..0.98, im in -2.0f64..2.0) {
        let z = Complex64::new(re, im);
        let report = correspondence_check(q as u32, z, 20);
        prop_assert!(report.max_error <= 1e-9, "{report:?}");
    }
}

#[test]
fn diagonal_distances() {
    for q in [2u64, 3, 5] {
        let id = PMatrix2::identity(q, PREC).unwrap();
        for i in 0..=5 {
            for j in 0..=5 {
                let d = PMatrix2::diag_powers(q, i, j, PREC).unwrap();
                assert_eq!(lattice_distance(&id, &d).unwrap(), (i - j).unsigned_abs());
            }
        }
        for n in 0..=10 {
            let y = PMatrix2::diag_powers(q, n, 0, PREC).unwrap();
            assert_eq!(lattice_distance(&id, &y).unwrap(), n as u64);
        }
    }
}

#[test]
fn spherical_function_on_the_group() {
    let z = Complex64::new(0.3, 0.2);
    let tree = spherical_symbol_closed_form(3, z, 6);
    for n in 0..6 {
        let y = PMatrix2::diag_powers(3, n, 0, PREC).unwrap();
        assert!((group_spherical(z, &y).unwrap() - tree[n as usize]).norm() < 1e-12);
        // conjugating by a unimodular matrix keeps the double coset
        let k = PMatrix2::from_rationals(3, [(1, 1), (1, 1), (0, 1), (1, 1)], PREC).unwrap();
        let g = k.mul(&y).unwrap().mul(&k).unwrap();
        assert!((group_spherical(z, &g).unwrap() - tree[n as usize]).norm() < 1e-12);
    }
    // confluent point of the quotient formula
    let half = Complex64::new(0.5, 0.0);
    let c = correspondence_check(5, half, 20);
    assert!(c.confluent && c.max_error <= 1e-9);
    assert!((mautner_spherical(5, half, 0) - 1.0).norm() < 1e-14);
}
