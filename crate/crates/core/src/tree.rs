//! Finite balls of the homogeneous tree with a fixed chain and climb map.
//!
//! The chain `x_0, x_1, ...` starts at the base vertex and always moves to the
//! first child. The climb map `c` sends a chain vertex to the next chain vertex
//! and any other vertex to its neighbour towards the base vertex, so the orbit
//! `x, c(x), c^2(x), ...` eventually runs along the chain.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::radial::{apply_resolvent, build_hankel, extract_parity, Certification, RadialSymbol};
use crate::spectral::{self, CMatrix};
use crate::Degree;

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct FiniteTreeBall {
    q: u32,
    radius: usize,
    ball_len: usize,
    /// Graph neighbour towards `x_0`; `None` only at `x_0`.
    up: Vec<Option<usize>>,
    /// The climb map; `None` only at the last stored chain vertex.
    climb: Vec<Option<usize>>,
    depth: Vec<usize>,
    chain: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeetingIndices {
    pub m: usize,
    pub n: usize,
}

pub fn build_ball(q: u32, radius: usize, chain_extra: usize) -> Result<FiniteTreeBall> {
    build_ball_capped(q, radius, chain_extra, DEFAULT_NODE_CAP)
}

pub fn build_ball_capped(q: u32, radius: usize, chain_extra: usize, cap: usize) -> Result<FiniteTreeBall> {
    if q < 2 {
        return Err(Error::InvalidDegree(q as u64));
    }
    if radius == 0 {
        return Err(Error::InvalidArgument("ball radius must be at least 1".into()));
    }
    // 1 + (q+1)(q^R - 1)/(q - 1), computed with overflow checks.
    let mut layer: u128 = (q as u128) + 1;
    let mut ball: u128 = 1;
    for _ in 0..radius {
        ball += layer;
        if ball > cap as u128 {
            break;
        }
        layer *= q as u128;
    }
    let requested = ball.saturating_add(chain_extra as u128);
    if requested > cap as u128 {
        return Err(Error::SizeCap {
            requested: requested.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let ball_len = ball as usize;
    let total = ball_len + chain_extra;
    let mut up = Vec::with_capacity(total);
    let mut depth = Vec::with_capacity(total);
    let mut first_child = vec![None; ball_len];
    up.push(None);
    depth.push(0);
    let mut frontier = vec![0usize];
    for d in 1..=radius {
        let mut next = Vec::new();
        for &p in &frontier {
            let kids = if d == 1 { q as usize + 1 } else { q as usize };
            for k in 0..kids {
                let id = up.len();
                up.push(Some(p));
                depth.push(d);
                if k == 0 {
                    first_child[p] = Some(id);
                }
                next.push(id);
            }
        }
        frontier = next;
    }
    debug_assert_eq!(up.len(), ball_len);
    let mut chain = vec![0usize];
    while let Some(c) = first_child[*chain.last().unwrap()] {
        chain.push(c);
    }
    for _ in 0..chain_extra {
        let prev = *chain.last().unwrap();
        let id = up.len();
        up.push(Some(prev));
        depth.push(depth[prev] + 1);
        chain.push(id);
    }
    let mut climb: Vec<Option<usize>> = up.clone();
    for w in chain.windows(2) {
        climb[w[0]] = Some(w[1]);
    }
    climb[*chain.last().unwrap()] = None;
    Ok(FiniteTreeBall {
        q,
        radius,
        ball_len,
        up,
        climb,
        depth,
        chain,
    })
}

impl FiniteTreeBall {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of vertices in the ball `B(x_0, R)`; they carry ids `0..ball_len`.
    pub fn ball_len(&self) -> usize {
        self.ball_len
    }

    /// Ball vertices plus chain extension vertices.
    pub fn node_count(&self) -> usize {
        self.up.len()
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn climb(&self, x: usize) -> Option<usize> {
        self.climb[x]
    }

    pub fn dist0(&self, x: usize) -> usize {
        self.depth[x]
    }

    /// Graph neighbours of `x` among the stored vertices.
    pub fn neighbours(&self, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.node_count()).filter(|&y| self.up[y] == Some(x)).collect();
        if let Some(p) = self.up[x] {
            out.push(p);
        }
        out
    }

    /// Graph distance through the lowest common ancestor towards `x_0`.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let (mut a, mut b) = (x, y);
        let mut d = 0;
        while self.depth[a] > self.depth[b] {
            a = self.up[a].unwrap();
            d += 1;
        }
        while self.depth[b] > self.depth[a] {
            b = self.up[b].unwrap();
            d += 1;
        }
        while a != b {
            a = self.up[a].unwrap();
            b = self.up[b].unwrap();
            d += 2;
        }
        d
    }

    /// `x, c(x), ..., c^(len-1)(x)`.
    pub fn orbit(&self, x: usize, len: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(len);
        let mut cur = x;
        for step in 0..len {
            out.push(cur);
            if step + 1 == len {
                break;
            }
            cur = self.climb[cur].ok_or(Error::OrbitEscapesBall { node: x, steps: step + 1 })?;
        }
        Ok(out)
    }

    fn full_orbit(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        while let Some(c) = self.climb[*out.last().unwrap()] {
            out.push(c);
        }
        out
    }
}

/// Smallest `(m, n)` with `c^m(x) = c^n(y)`.
pub fn meeting_indices(tree: &FiniteTreeBall, x: usize, y: usize) -> Result<MeetingIndices> {
    let ox = tree.full_orbit(x);
    let pos: HashMap<usize, usize> = ox.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut cur = y;
    let mut n = 0;
    loop {
        if let Some(&m) = pos.get(&cur) {
            return Ok(MeetingIndices { m, n });
        }
        cur = tree.climb[cur].ok_or(Error::OrbitEscapesBall { node: y, steps: n + 1 })?;
        n += 1;
    }
}

/// Gram values of the vectors `delta'_x`: 1 on the diagonal, `-1/(q-1)` for
/// distinct vertices with the same image under `c`, 0 otherwise.
pub fn deltaprime_gram(tree: &FiniteTreeBall, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(1.0);
    }
    let cx = tree.climb[x].ok_or(Error::OrbitEscapesBall { node: x, steps: 1 })?;
    let cy = tree.climb[y].ok_or(Error::OrbitEscapesBall { node: y, steps: 1 })?;
    Ok(if cx == cy { -1.0 / (tree.q as f64 - 1.0) } else { 0.0 })
}

/// Entry `(i, j)` of `S_{m,n}`.
pub fn smn_entry(q: u32, m: usize, n: usize, i: usize, j: usize) -> f64 {
    let a = i as i64 - m as i64;
    let b = j as i64 - n as i64;
    if a != b {
        0.0
    } else if a >= 0 {
        1.0
    } else if a == -1 {
        -1.0 / (q as f64 - 1.0)
    } else {
        0.0
    }
}

fn iterate(tree: &FiniteTreeBall, x: usize, k: usize) -> Result<usize> {
    let mut cur = x;
    for step in 0..k {
        cur = tree.climb[cur].ok_or(Error::OrbitEscapesBall { node: x, steps: step + 1 })?;
    }
    Ok(cur)
}

/// Matrix entry `<U_{m,n} delta_y, delta_x>`.
pub fn umn_entry(tree: &FiniteTreeBall, m: usize, n: usize, x: usize, y: usize) -> Result<f64> {
    let qf = tree.q as f64;
    let w = qf.powf(-((m + n) as f64) / 2.0);
    let same = |a: usize, b: usize| -> Result<bool> { Ok(iterate(tree, y, b)? == iterate(tree, x, a)?) };
    if m == 0 || n == 0 {
        return Ok(if same(m, n)? { w } else { 0.0 });
    }
    let hit = same(m, n)? as i32 - same(m - 1, n - 1)? as i32;
    Ok(hit as f64 * w / (1.0 - 1.0 / qf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMode {
    DeltaPrime(u32),
    DeltaPlain,
}

/// `phi(d(x,y)) = c+ + c-(-1)^d + sum_k <P_k(x), Q_k(y)>` with
/// `P_k(x) = sum_i xi_i^(k) e_{c^i(x)}` and `Q_k(y) = sum_j eta_j^(k) e_{c^j(y)}`.
#[derive(Debug, Clone)]
pub struct FactorizationCertificate {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub vectors: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    pub gram_mode: GramMode,
    /// `sum_k ||xi^(k)|| ||eta^(k)||`.
    pub value: f64,
    /// Bound on the kernel error caused by truncation and discarded singular values.
    pub truncation_error: f64,
    kernel: CMatrix,
}

impl FactorizationCertificate {
    pub fn len(&self) -> usize {
        self.kernel.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `|c+| + |c-| + value`, the upper bound witnessed by the factorization.
    pub fn norm_bound(&self) -> f64 {
        self.c_plus.norm() + self.c_minus.norm() + self.value
    }
}

pub fn build_certificate(sym: &RadialSymbol, q: Degree, n: usize) -> Result<FactorizationCertificate> {
    let h = build_hankel(sym, q, n, Certification::Required)?;
    let parity = extract_parity(sym, &h, 1e-9)?;
    let (mat, mode) = match q {
        Degree::Finite(qq) => (apply_resolvent(&h.entries, qq)?, GramMode::DeltaPrime(qq)),
        Degree::Infinite => (h.entries.clone(), GramMode::DeltaPlain),
    };
    let d = spectral::svd(&mat, spectral::DEFAULT_TOL)?;
    let smax = d.sigma.first().copied().unwrap_or(0.0);
    let cutoff = smax * f64::EPSILON;
    let mut vectors = Vec::new();
    let mut value = 0.0;
    let mut dropped = 0.0;
    let mut kernel = CMatrix::zeros(n, n);
    for (k, &s) in d.sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            dropped += s;
            continue;
        }
        let r = s.sqrt();
        let xi: Vec<Complex64> = d.u.column(k).iter().map(|&v| v * r).collect();
        let eta: Vec<Complex64> = d.v.column(k).iter().map(|&v| v * r).collect();
        value += norm(&xi) * norm(&eta);
        for i in 0..n {
            for j in 0..n {
                kernel[(i, j)] += xi[i] * eta[j].conj();
            }
        }
        vectors.push((xi, eta));
    }
    let rounding = 16.0 * n as f64 * f64::EPSILON * d.sigma.iter().sum::<f64>();
    Ok(FactorizationCertificate {
        c_plus: parity.c_plus,
        c_minus: parity.c_minus,
        vectors,
        gram_mode: mode,
        value,
        truncation_error: h.tail_bound + 2.0 * parity.error + dropped + rounding,
        kernel,
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Evaluates the certificate kernel on a tree, caching orbit positions.
pub struct KernelEvaluator<'a> {
    cert: &'a FactorizationCertificate,
    tree: &'a FiniteTreeBall,
    orbits: HashMap<usize, Vec<usize>>,
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(cert: &'a FactorizationCertificate, tree: &'a FiniteTreeBall) -> Result<Self> {
        if let GramMode::DeltaPrime(q) = cert.gram_mode {
            if q != tree.q {
                return Err(Error::InvalidArgument(format!(
                    "certificate built for q = {q}, tree has q = {}",
                    tree.q
                )));
            }
        }
        Ok(Self {
            cert,
            tree,
            orbits: HashMap::new(),
        })
    }

    fn ensure_orbit(&mut self, x: usize) -> Result<()> {
        if !self.orbits.contains_key(&x) {
            let o = self.tree.orbit(x, self.cert.len() + 1)?;
            self.orbits.insert(x, o);
        }
        Ok(())
    }

    pub fn eval(&mut self, x: usize, y: usize) -> Result<Complex64> {
        let n = self.cert.len();
        self.ensure_orbit(x)?;
        self.ensure_orbit(y)?;
        let ox = &self.orbits[&x];
        let oy = &self.orbits[&y];
        let pos: HashMap<usize, usize> = oy.iter().enumerate().map(|(j, &v)| (v, j)).collect();
        let k = &self.cert.kernel;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &w) in ox.iter().take(n).enumerate() {
            if let Some(&j) = pos.get(&w) {
                if j < n {
                    acc += k[(i, j)];
                }
            }
            if let GramMode::DeltaPrime(q) = self.cert.gram_mode {
                // Siblings: c^j(y) != w with c^(j+1)(y) = c(w).
                let parent = ox[i + 1];
                if let Some(&jp) = pos.get(&parent) {
                    if jp >= 1 && jp - 1 < n && oy[jp - 1] != w {
                        acc -= k[(i, jp - 1)] / (q as f64 - 1.0);
                    }
                }
            }
        }
        let d = self.tree.distance(x, y);
        let sign = if d.is_multiple_of(2) { self.cert.c_minus } else { -self.cert.c_minus };
        Ok(self.cert.c_plus + sign + acc)
    }
}

pub fn reconstruct_kernel(cert: &FactorizationCertificate, tree: &FiniteTreeBall, x: usize, y: usize) -> Result<Complex64> {
    KernelEvaluator::new(cert, tree)?.eval(x, y)
}

/// Largest `|reconstruct_kernel(x, y) - phi(d(x, y))|` over all ball pairs.
pub fn reconstruction_max_error(cert: &FactorizationCertificate, sym: &RadialSymbol, tree: &FiniteTreeBall) -> Result<f64> {
    let phi = sym.values(2 * tree.radius + 1);
    let mut ev = KernelEvaluator::new(cert, tree)?;
    let mut worst: f64 = 0.0;
    for x in 0..tree.ball_len {
        for y in 0..tree.ball_len {
            let v = ev.eval(x, y)?;
            worst = worst.max((v - phi[tree.distance(x, y)]).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub value: f64,
    pub random_best: f64,
    pub structured_best: f64,
}

/// `max ||M_phi(A)|| / ||A||` over seeded complex Gaussian matrices on the
/// ball and over the restrictions of the matrices `U_{m,n}`.
pub fn empirical_schur_lower_bound(sym: &RadialSymbol, tree: &FiniteTreeBall, trials: usize, seed: u64) -> Result<LowerBoundReport> {
    let b = tree.ball_len;
    let r = tree.radius;
    let phi = sym.values(2 * r + 1);
    let dist: Vec<usize> = (0..b * b).map(|k| tree.distance(k / b, k % b)).collect();
    let tol = spectral::DEFAULT_TOL;
    let schur = |a: &CMatrix| CMatrix::from_fn(b, b, |i, j| a[(i, j)] * phi[dist[i * b + j]]);

    let mut random_best: f64 = 0.0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let a = CMatrix::from_fn(b, b, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        let den = spectral::operator_norm(&a, tol)?;
        if den > 0.0 {
            random_best = random_best.max(spectral::operator_norm(&schur(&a), tol)? / den);
        }
    }

    let mut structured_best: f64 = 0.0;
    let meet: Vec<MeetingIndices> = (0..b * b)
        .map(|k| meeting_indices(tree, k / b, k % b))
        .collect::<Result<_>>()?;
    let mut pairs: Vec<(usize, usize)> = meet.iter().map(|mi| (mi.m, mi.n)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (m, n) in pairs {
        let u = CMatrix::from_fn(b, b, |i, j| {
            let mi = meet[i * b + j];
            if mi.m == m && mi.n == n {
                Complex64::new(umn_entry(tree, m, n, i, j).unwrap_or(0.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let den = spectral::operator_norm(&u, tol)?;
        if den > 0.0 {
            structured_best = structured_best.max(spectral::operator_norm(&schur(&u), tol)? / den);
        }
    }
    Ok(LowerBoundReport {
        value: random_best.max(structured_best),
        random_best,
        structured_best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_sizes() {
        assert_eq!(build_ball(2, 1, 0).unwrap().ball_len(), 4);
        assert_eq!(build_ball(2, 2, 0).unwrap().ball_len(), 10);
        assert_eq!(build_ball(3, 1, 0).unwrap().ball_len(), 5);
        let t = build_ball(3, 3, 7).unwrap();
        assert_eq!(t.node_count(), 1 + 4 * 13 + 7);
        assert!(matches!(build_ball(3, 30, 0), Err(Error::SizeCap { .. })));
        assert!(build_ball(1, 2, 0).is_err());
    }

    #[test]
    fn root_degree_and_children() {
        let t = build_ball(3, 3, 0).unwrap();
        assert_eq!(t.neighbours(0).len(), 4);
        for x in 1..t.ball_len() {
            if t.dist0(x) < 3 {
                assert_eq!(t.neighbours(x).len(), 4, "vertex {x}");
            }
        }
    }

    #[test]
    fn chain_follows_climb() {
        let t = build_ball(2, 3, 5).unwrap();
        let ch = t.chain().to_vec();
        assert_eq!(ch.len(), 3 + 5 + 1);
        for (i, w) in ch.windows(2).enumerate() {
            assert_eq!(t.climb(w[0]), Some(w[1]));
            assert_eq!(t.dist0(w[0]), i);
        }
    }

    #[test]
    fn meeting_examples() {
        let t = build_ball(2, 3, 4).unwrap();
        assert_eq!(meeting_indices(&t, 5, 5).unwrap(), MeetingIndices { m: 0, n: 0 });
        let x2 = t.chain()[2];
        assert_eq!(meeting_indices(&t, x2, 0).unwrap(), MeetingIndices { m: 0, n: 2 });
        // neighbours 2 and 3 of x_0 are off the chain and climb to x_0
        let mi = meeting_indices(&t, 2, 3).unwrap();
        assert_eq!(mi, MeetingIndices { m: 1, n: 1 });
        assert_eq!(t.distance(2, 3), 2);
    }

    #[test]
    fn gram_examples() {
        let t = build_ball(3, 2, 2).unwrap();
        assert_eq!(deltaprime_gram(&t, 4, 4).unwrap(), 1.0);
        assert_eq!(deltaprime_gram(&t, 2, 3).unwrap(), -0.5);
        // 2 climbs to x_0, x_0 climbs to x_1
        assert_eq!(deltaprime_gram(&t, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn smn_examples() {
        assert_eq!(smn_entry(3, 0, 0, 4, 4), 1.0);
        assert_eq!(smn_entry(3, 1, 1, 0, 0), -0.5);
        assert_eq!(smn_entry(3, 2, 0, 1, 0), 0.0);
        assert_eq!(smn_entry(3, 2, 1, 2, 1), 1.0);
        assert_eq!(smn_entry(3, 2, 1, 0, 0), 0.0);
    }

    #[test]
    fn umn_examples() {
        let t = build_ball(3, 2, 3).unwrap();
        assert_eq!(umn_entry(&t, 0, 0, 6, 6).unwrap(), 1.0);
        assert_abs_diff_eq!(umn_entry(&t, 1, 1, 2, 3).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(umn_entry(&t, 1, 0, 6, 6).unwrap(), 0.0);
    }

    #[test]
    fn certificate_examples() {
        let one = RadialSymbol::constant(Complex64::new(1.0, 0.0));
        let c = build_certificate(&one, Degree::Finite(3), 16).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.c_plus, Complex64::new(1.0, 0.0));
        let t = build_ball(3, 2, 17).unwrap();
        assert_eq!(reconstruct_kernel(&c, &t, 0, 0).unwrap(), Complex64::new(1.0, 0.0));

        let s = RadialSymbol::power(Complex64::new(0.5, 0.0)).unwrap();
        let c = build_certificate(&s, Degree::Infinite, 48).unwrap();
        assert_eq!(c.vectors.len(), 1);
        assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lower_bound_trivial_symbols() {
        let t = build_ball(2, 2, 0).unwrap();
        let one = RadialSymbol::constant(Complex64::new(1.0, 0.0));
        let r = empirical_schur_lower_bound(&one, &t, 5, 1).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
        let alt = RadialSymbol::explicit(vec![], Some((Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)))).unwrap();
        let r = empirical_schur_lower_bound(&alt, &t, 5, 1).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
    }
}
