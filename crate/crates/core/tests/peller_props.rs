use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use treeschur::corpus::trace_class_corpus;
use treeschur::peller::{
    disc_l1_norm, g_from_symbol, gamma_coeffs, gamma_convolution_check, measure_bound, moments_from_g,
    optimal_measure, peller_sandwich, AnalyticDiscFunction, DiscMeasure, PolarQuadrature,
};
use treeschur::radial::{build_hankel, extract_parity, schur_norm, Certification, RadialSymbol};
use treeschur::Degree;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn finite_symbol() -> impl Strategy<Value = RadialSymbol> {
    prop::collection::vec(cplx(), 1..8).prop_map(|v| RadialSymbol::explicit(v, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_is_exact_on_weighted_moments(n_r in 14usize..48, n_theta in 14usize..80, wide in prop::bool::ANY) {
        let quad = PolarQuadrature::new(n_r, n_theta).unwrap();
        prop_assert!(quad.moment_defect(12) <= 1e-12);
        // the graded angular map is exact only once it resolves the grading
        let graded = PolarQuadrature::graded(n_r, if wide { 512 } else { 256 }).unwrap();
        prop_assert!(graded.moment_defect(12) <= 1e-12);
    }

    #[test]
    fn g_coefficients_weight_the_differences(sym in finite_symbol()) {
        let g = g_from_symbol(&sym).unwrap();
        for (n, gn) in g.coefficients().iter().enumerate() {
            let c = sym.eval(n) - sym.eval(n + 2);
            prop_assert!((gn - c * ((n + 1) * (n + 2)) as f64).norm() <= 1e-13);
        }
    }

    #[test]
    fn moments_reproduce_hankel_entries(sym in finite_symbol()) {
        let quad = PolarQuadrature::default();
        let g = g_from_symbol(&sym).unwrap();
        let m = moments_from_g(&g, &quad, 10).unwrap();
        let h = build_hankel(&sym, Degree::Infinite, 6, Certification::Required).unwrap();
        for d in 0..=10 {
            prop_assert!((m[d] - h.antidiagonals[d]).norm() <= 1e-8);
        }
    }

    #[test]
    fn disc_norm_is_absolutely_homogeneous(c in prop::collection::vec(cplx(), 1..6), alpha in cplx()) {
        let quad = PolarQuadrature::default();
        let g = AnalyticDiscFunction::from_coefficients(&c, 0.0, 0.0).unwrap();
        let base = disc_l1_norm(&g, &quad).unwrap().value;
        let scaled = disc_l1_norm(&g.scaled(alpha), &quad).unwrap().value;
        prop_assert!((scaled - alpha.norm() * base).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn trace_norm_sandwich_for_rank_one(r in 0.05f64..0.75, t in 0.0f64..(2.0 * PI)) {
        let sym = RadialSymbol::power(Complex64::from_polar(r, t)).unwrap();
        let quad = PolarQuadrature::default();
        let g = g_from_symbol(&sym).unwrap();
        let h = build_hankel(&sym, Degree::Infinite, 96, Certification::Required).unwrap();
        let rep = peller_sandwich(&h, &g, &quad).unwrap();
        prop_assert!(rep.holds, "{rep:?}");
        prop_assert!(rep.lhs <= rep.mid + rep.error && rep.mid <= rep.rhs + rep.error);
    }
}

#[test]
fn gamma_convolution_up_to_fifty() {
    assert!((0..=50).all(gamma_convolution_check));
    // Taylor coefficients of (1-x)^(-3/2): 1, 3/2, 15/8, 35/16
    let g = gamma_coeffs(3);
    assert_eq!(g, vec![1.0, 1.5, 15.0 / 8.0, 35.0 / 16.0]);
}

#[test]
fn optimal_measure_reproduces_symbol_and_bounds_the_norm() {
    let graded = PolarQuadrature::graded(80, 512).unwrap();
    for sym in trace_class_corpus() {
        let h = build_hankel(&sym, Degree::Infinite, 256, Certification::Required).unwrap();
        let p = extract_parity(&sym, &h, 1e-12).unwrap();
        let mu = optimal_measure(&sym, p.c_plus, p.c_minus, &graded).unwrap();
        let phi = sym.values(31);
        for (n, v) in phi.iter().enumerate() {
            assert!((mu.moment(n) - v).norm() <= 1e-6, "{} at n={n}", sym.label());
        }
        let rep = measure_bound(&sym, &mu, Some(Degree::Finite(3))).unwrap();
        assert!(rep.holds, "{}: {rep:?}", sym.label());
        let k = rep.finite_q_constant.unwrap();
        assert!((k - 8.0 / PI * 2.0).abs() < 1e-15);
        let norm_q = schur_norm(&sym, Degree::Finite(3), 1e-9).unwrap();
        assert!(rep.upper <= k * norm_q.total + 1e-6, "{}: {} > {}", sym.label(), rep.upper, k * norm_q.total);
    }
}

#[test]
fn atomic_measure_upper_bound() {
    // phi(n) = s^n is the moment sequence of one atom at s
    let s = Complex64::new(0.3, 0.4);
    let zero = Complex64::new(0.0, 0.0);
    let mu = DiscMeasure::new(vec![(s, Complex64::new(1.0, 0.0))], zero, zero).unwrap();
    let sym = RadialSymbol::power(s).unwrap();
    let rep = measure_bound(&sym, &mu, None).unwrap();
    assert!(rep.matches && rep.holds);
    let expected = (1.0 - s * s).norm() / (1.0 - s.norm_sqr());
    assert!((rep.upper - expected).abs() < 1e-15);
    // the bound is attained by a single atom
    assert!((rep.schur_norm.unwrap() - expected).abs() <= 1e-8);
    assert!(DiscMeasure::new(vec![(Complex64::new(1.0, 0.0), s)], zero, zero).is_err());
}
