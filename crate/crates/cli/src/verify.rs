//! Cross-module invariant suites run by `treeschur verify`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeschur::corpus::trace_class_corpus;
use treeschur::padic::{correspondence_check, lattice_distance, PAdic, PMatrix2};
use treeschur::peller::{
    disc_l1_norm, g_from_symbol, gamma_convolution_check, moments_from_g, optimal_measure, peller_sandwich,
    AnalyticDiscFunction, PolarQuadrature,
};
use treeschur::radial::{build_hankel, extract_parity, schur_norm, subtree_sandwich_check, Certification, RadialSymbol};
use treeschur::tree::{
    build_ball, build_certificate, deltaprime_gram, empirical_schur_lower_bound, meeting_indices, reconstruction_max_error,
    smn_entry, umn_entry,
};
use treeschur::{Degree, Result};

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

fn check(suite: &'static str, name: impl Into<String>, max_error: f64, tolerance: f64) -> Check {
    Check {
        suite,
        name: name.into(),
        pass: max_error <= tolerance,
        max_error,
        tolerance,
    }
}

pub const SUITES: [&str; 4] = ["tree", "peller", "padic", "sandwich"];

pub fn run(suite: &str, seed: u64) -> Result<Vec<Check>> {
    match suite {
        "tree" => tree_suite(seed),
        "peller" => peller_suite(),
        "padic" => padic_suite(seed),
        "sandwich" => sandwich_suite(),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run(s, seed)?);
            }
            Ok(out)
        }
        other => Err(treeschur::Error::InvalidArgument(format!(
            "unknown suite {other:?}; expected one of tree, peller, padic, sandwich, all"
        ))),
    }
}

fn tree_suite(seed: u64) -> Result<Vec<Check>> {
    const S: &str = "tree";
    let mut out = Vec::new();
    let tree = build_ball(3, 3, 8)?;
    let b = tree.ball_len();

    let mut bad = 0usize;
    for x in 0..b {
        for y in 0..b {
            let mi = meeting_indices(&tree, x, y)?;
            let mj = meeting_indices(&tree, y, x)?;
            if mi.m + mi.n != tree.distance(x, y) || (mi.m, mi.n) != (mj.n, mj.m) {
                bad += 1;
            }
        }
    }
    out.push(check(S, "meeting indices symmetric with m + n = d", bad as f64, 0.0));

    let mut worst: f64 = 0.0;
    for x in 0..b {
        for y in 0..b {
            let mi = meeting_indices(&tree, x, y)?;
            let ox = tree.orbit(x, 5)?;
            let oy = tree.orbit(y, 5)?;
            for i in 0..5 {
                for j in 0..5 {
                    let g = deltaprime_gram(&tree, ox[i], oy[j])?;
                    worst = worst.max((g - smn_entry(3, mi.m, mi.n, i, j)).abs());
                }
            }
        }
    }
    out.push(check(S, "Gram table matches S_{m,n} entries", worst, 0.0));

    let mut worst: f64 = 0.0;
    for y in (0..b).filter(|&y| tree.dist0(y) < tree.radius()) {
        let mut sq = 0.0;
        for x in 0..b {
            sq += umn_entry(&tree, 1, 0, x, y)?.powi(2);
        }
        worst = worst.max((sq - 1.0).abs());
    }
    out.push(check(S, "U_{1,0} columns inside the ball are unit vectors", worst, 1e-14));

    let corpus = trace_class_corpus();
    let n = 128;
    let tree3 = build_ball(3, 3, n + 1)?;
    let mut worst_margin = f64::NEG_INFINITY;
    for sym in &corpus {
        let cert = build_certificate(sym, Degree::Finite(3), n)?;
        let err = reconstruction_max_error(&cert, sym, &tree3)?;
        worst_margin = worst_margin.max(err - cert.truncation_error.max(1e-12));
    }
    out.push(check(S, "q=3 certificates reconstruct the kernel within their error", worst_margin.max(0.0), 0.0));

    let tree5 = build_ball(5, 2, n + 1)?;
    let mut worst: f64 = 0.0;
    for sym in corpus.iter().take(6) {
        let cert = build_certificate(sym, Degree::Infinite, n)?;
        worst = worst.max(reconstruction_max_error(&cert, sym, &tree5)?);
    }
    out.push(check(S, "plain-Gram certificates reconstruct the kernel on a q=5 ball", worst, 1e-8));

    let small = build_ball(3, 2, 0)?;
    let mut worst = f64::NEG_INFINITY;
    for sym in &corpus {
        let lb = empirical_schur_lower_bound(sym, &small, 5, seed)?;
        let norm = schur_norm(sym, Degree::Finite(3), 1e-10)?;
        worst = worst.max(lb.value - norm.total - norm.certified_error);
    }
    out.push(check(S, "sampled lower bounds stay below the Schur norm", worst.max(0.0), 1e-9));
    Ok(out)
}

fn peller_suite() -> Result<Vec<Check>> {
    const S: &str = "peller";
    let mut out = Vec::new();
    let bad = (0..=50).filter(|&n| !gamma_convolution_check(n)).count();
    out.push(check(S, "gamma convolution identity for n <= 50", bad as f64, 0.0));

    let quad = PolarQuadrature::default();
    out.push(check(S, "quadrature reproduces disc moments", quad.moment_defect(12), 1e-12));

    let mut worst: f64 = 0.0;
    for s in [Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.0), Complex64::from_polar(0.8, PI / 5.0)] {
        let sym = RadialSymbol::power(s)?;
        let g = g_from_symbol(&sym)?;
        let h = build_hankel(&sym, Degree::Infinite, 128, Certification::Required)?;
        let r = peller_sandwich(&h, &g, &quad)?;
        worst = worst.max(if r.holds { r.error } else { f64::INFINITY });
    }
    out.push(check(S, "trace norm sandwich for rank-one families", worst, 1e-4));

    let mut worst: f64 = 0.0;
    for sym in trace_class_corpus() {
        let g = g_from_symbol(&sym)?;
        let m = moments_from_g(&g, &quad, 10)?;
        let h = build_hankel(&sym, Degree::Infinite, 6, Certification::Required)?;
        for d in 0..=10 {
            worst = worst.max((m[d] - h.antidiagonals[d]).norm());
        }
    }
    out.push(check(S, "moments of g reproduce Hankel entries", worst, 1e-8));

    let graded = PolarQuadrature::graded(80, 512)?;
    let mut worst: f64 = 0.0;
    for sym in trace_class_corpus() {
        let h = build_hankel(&sym, Degree::Infinite, 256, Certification::Required)?;
        let p = extract_parity(&sym, &h, 1e-12)?;
        let mu = optimal_measure(&sym, p.c_plus, p.c_minus, &graded)?;
        let phi = sym.values(31);
        for (k, v) in phi.iter().enumerate() {
            worst = worst.max((mu.moment(k) - v).norm());
        }
    }
    out.push(check(S, "optimal measure reproduces the symbol", worst, 1e-6));

    let g = AnalyticDiscFunction::from_coefficients(&[Complex64::new(0.3, -0.1), Complex64::new(0.2, 0.0)], 0.0, 0.0)?;
    let base = disc_l1_norm(&g, &quad)?.value;
    let scaled = disc_l1_norm(&g.scaled(Complex64::new(-2.0, 1.5)), &quad)?.value;
    out.push(check(S, "disc L1 norm is absolutely homogeneous", (scaled - 2.5 * base).abs(), 1e-12));
    Ok(out)
}

fn random_padic(rng: &mut ChaCha8Rng, q: u64, prec: u32) -> Result<PAdic> {
    let mut num: i64 = rng.random_range(-1_000_000..=1_000_000);
    let mut den: i64 = rng.random_range(1..=1_000_000);
    let k: i32 = rng.random_range(-3..=3);
    if k >= 0 {
        num *= (q as i64).pow(k as u32);
    } else {
        den *= (q as i64).pow((-k) as u32);
    }
    PAdic::from_rational(q, num, den, prec)
}

fn random_matrix(rng: &mut ChaCha8Rng, q: u64, prec: u32) -> Result<PMatrix2> {
    loop {
        let e = [(); 4].map(|_| {
            let n: i64 = rng.random_range(-50..=50);
            let d: i64 = rng.random_range(1..=50);
            (n, d)
        });
        match PMatrix2::from_rationals(q, e, prec) {
            Ok(m) => return Ok(m),
            Err(treeschur::Error::InvalidArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

fn padic_suite(seed: u64) -> Result<Vec<Check>> {
    const S: &str = "padic";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = 40;
    let (mut ultra, mut mult, mut ring) = (0usize, 0usize, 0usize);
    for &q in &[2u64, 3, 5] {
        for _ in 0..1000 {
            let x = random_padic(&mut rng, q, prec)?;
            let y = random_padic(&mut rng, q, prec)?;
            let z = random_padic(&mut rng, q, prec)?;
            if x.add(&y)?.norm() > x.norm().max(y.norm()) {
                ultra += 1;
            }
            // |xy| = |x||y| compared through valuations, which is exact
            let expected = match (x.valuation(), y.valuation()) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            if x.mul(&y)?.valuation() != expected {
                mult += 1;
            }
            let assoc = x.add(&y)?.add(&z)?.approx_eq(&x.add(&y.add(&z)?)?)?;
            let distrib = x.mul(&y.add(&z)?)?.approx_eq(&x.mul(&y)?.add(&x.mul(&z)?)?)?;
            if !(assoc && distrib) {
                ring += 1;
            }
        }
    }
    out.push(check(S, "ultrametric inequality", ultra as f64, 0.0));
    out.push(check(S, "multiplicative norm", mult as f64, 0.0));
    out.push(check(S, "ring axioms within tracked precision", ring as f64, 0.0));

    let mut bad = 0usize;
    for &q in &[2u64, 3, 5] {
        let id = PMatrix2::identity(q, prec)?;
        for i in 0..=5 {
            for j in 0..=5 {
                let d = lattice_distance(&id, &PMatrix2::diag_powers(q, i, j, prec)?)?;
                if d != (i - j).unsigned_abs() {
                    bad += 1;
                }
            }
        }
        for n in 0..=10 {
            if lattice_distance(&id, &PMatrix2::diag_powers(q, n, 0, prec)?)? != n as u64 {
                bad += 1;
            }
        }
        for _ in 0..50 {
            let a = random_matrix(&mut rng, q, prec)?;
            let b = random_matrix(&mut rng, q, prec)?;
            let g = random_matrix(&mut rng, q, prec)?;
            let d = lattice_distance(&a, &b)?;
            if lattice_distance(&g.mul(&a)?, &g.mul(&b)?)? != d {
                bad += 1;
            }
            for k in -2..=2 {
                let scaled = b.scale(&PAdic::power_of_q(q, k, prec)?)?;
                if lattice_distance(&a, &scaled)? != d {
                    bad += 1;
                }
            }
        }
    }
    out.push(check(S, "lattice distance values and invariances", bad as f64, 0.0));

    let mut worst: f64 = 0.0;
    for &q in &[2u32, 3, 5] {
        let mut zs = vec![Complex64::new(0.5, 0.0)];
        for _ in 0..9 {
            zs.push(Complex64::new(rng.random_range(0.0..1.0), rng.random_range(0.0..PI / (q as f64).ln())));
        }
        for z in zs {
            worst = worst.max(correspondence_check(q, z, 20).max_error);
        }
    }
    out.push(check(S, "Mautner formula matches the tree spherical function", worst, 1e-9));
    Ok(out)
}

fn sandwich_suite() -> Result<Vec<Check>> {
    const S: &str = "sandwich";
    let mut failures = 0usize;
    for sym in trace_class_corpus() {
        for q in [2, 3] {
            let r = subtree_sandwich_check(&sym, q, 1e-8)?;
            if !r.holds || r.slack > 1e-6 {
                failures += 1;
            }
        }
    }
    Ok(vec![check(S, "subtree sandwich on the corpus", failures as f64, 0.0)])
}
