use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::combination::FiniteDirichletSeries;
use crate::arith::factorize;
use crate::error::{Error, Result};

/// Per-prime phase targets: find `t` with `(t - t_p) log p = 0 mod 2 pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTarget {
    pub primes: Vec<u64>,
    pub shifts: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PhaseTarget {
    pub fn new(primes: Vec<u64>, shifts: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if primes.is_empty() || primes.len() != shifts.len() || primes.len() != weights.len() {
            return Err(Error::InvalidArgument("primes, shifts and weights must be nonempty and of equal length".into()));
        }
        Ok(PhaseTarget { primes, shifts, weights })
    }

    /// Unit weights.
    pub fn unweighted(primes: Vec<u64>, shifts: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; primes.len()];
        Self::new(primes, shifts, w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// Every `|(t - t_p) log p mod 2 pi|` at most this many radians.
    MaxPhase(f64),
    /// `sum_p w_p |p^{-it} - p^{-i t_p}|` below this.
    Weighted(f64),
}

impl Tolerance {
    pub fn value(&self) -> f64 {
        match *self {
            Tolerance::MaxPhase(x) | Tolerance::Weighted(x) => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxMethod {
    Exact,
    Grid,
    Lattice,
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub t: f64,
    pub discrepancy: f64,
    pub phase_errors: Vec<f64>,
    pub method: ApproxMethod,
}

#[derive(Clone, Copy, Debug)]
pub struct ApproxParams {
    /// Grid scans cover `t` in `[0, grid_limit]`.
    pub grid_limit: f64,
    /// Grid scan first when there are at most this many primes.
    pub max_grid_primes: usize,
    /// Largest `|t|` the lattice search may return.
    pub max_t: f64,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams { grid_limit: 1e6, max_grid_primes: 3, max_t: 1e15 }
    }
}

/// `(t - t_p) log p` reduced to `(-pi, pi]`.
pub fn phase_errors(target: &PhaseTarget, t: f64) -> Vec<f64> {
    target.primes.iter().zip(&target.shifts).map(|(&p, &tp)| wrap((t - tp) * (p as f64).ln())).collect()
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Discrepancy of `t` in the units of `tol`.
pub fn discrepancy(target: &PhaseTarget, tol: Tolerance, t: f64) -> f64 {
    let errs = phase_errors(target, t);
    match tol {
        Tolerance::MaxPhase(_) => errs.iter().map(|e| e.abs()).fold(0.0, f64::max),
        Tolerance::Weighted(_) => errs.iter().zip(&target.weights).map(|(e, w)| w * 2.0 * (0.5 * e).sin().abs()).sum(),
    }
}

/// `w_p = sum_m |a_m| m^{-sigma1} v_p(m)`: a change of `p^{-it}` by `delta` moves the
/// series by at most `w_p delta`.
pub fn prime_weights(series: &FiniteDirichletSeries, sigma1: f64) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    for &(m, a) in series.terms() {
        if m < 2 {
            continue;
        }
        let w = a.norm() * (m as f64).powf(-sigma1);
        for (p, e) in factorize(m) {
            *out.entry(p).or_insert(0.0) += w * e as f64;
        }
    }
    out
}

/// Heuristic density of good `t`: the chance that independent uniform phases all fall
/// within tolerance.
fn density(target: &PhaseTarget, tol: Tolerance) -> f64 {
    let k = target.primes.len() as f64;
    target
        .weights
        .iter()
        .map(|w| match tol {
            Tolerance::MaxPhase(x) => (x / PI).min(1.0),
            Tolerance::Weighted(x) => (x / (k * w.max(1e-300) * PI)).min(1.0),
        })
        .product()
}

/// Convex-minimizes the discrepancy on the stretch around `t` where no phase wraps.
fn polish(target: &PhaseTarget, tol: Tolerance, t: f64) -> f64 {
    let errs = phase_errors(target, t);
    let reach = target
        .primes
        .iter()
        .zip(&errs)
        .map(|(&p, e)| (PI - e.abs()) / (p as f64).ln())
        .fold(f64::INFINITY, f64::min)
        * 0.5;
    let f = |x: f64| {
        let v: Vec<f64> = target.primes.iter().zip(&errs).map(|(&p, e)| e + x * (p as f64).ln()).collect();
        match tol {
            Tolerance::MaxPhase(_) => v.iter().map(|e| e.abs()).fold(0.0, f64::max),
            Tolerance::Weighted(_) => v.iter().zip(&target.weights).map(|(e, w)| w * 2.0 * (0.5 * e).sin().abs()).sum(),
        }
    };
    let (mut a, mut b) = (-reach, reach);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let x = 0.5 * (a + b);
    let candidate = t + x;
    if discrepancy(target, tol, candidate) <= discrepancy(target, tol, t) {
        candidate
    } else {
        t
    }
}

fn grid_scan(target: &PhaseTarget, tol: Tolerance, limit: f64) -> (f64, f64) {
    let logs: Vec<f64> = target.primes.iter().map(|&p| (p as f64).ln()).collect();
    let speed: f64 = match tol {
        Tolerance::MaxPhase(_) => logs.iter().sum(),
        Tolerance::Weighted(_) => logs.iter().zip(&target.weights).map(|(l, w)| l * w).sum(),
    };
    let h = tol.value() / speed.max(1e-300);
    let steps = (limit / h).ceil() as u64;
    let mut phases = phase_errors(target, 0.0);
    let incs: Vec<f64> = logs.iter().map(|l| l * h).collect();
    let mut best = (0.0, f64::INFINITY);
    for k in 0..=steps {
        let d = match tol {
            Tolerance::MaxPhase(_) => phases.iter().map(|e| e.abs()).fold(0.0, f64::max),
            Tolerance::Weighted(_) => phases.iter().zip(&target.weights).map(|(e, w)| w * 2.0 * (0.5 * e).sin().abs()).sum(),
        };
        if d < best.1 {
            best = (k as f64 * h, d);
            if d <= tol.value() {
                break;
            }
        }
        for (ph, inc) in phases.iter_mut().zip(&incs) {
            *ph += inc;
            if *ph > PI {
                *ph -= TAU;
            }
        }
        // drift from repeated increments is reset periodically
        if k % 4096 == 4095 {
            phases = phase_errors(target, (k + 1) as f64 * h);
        }
    }
    best
}

/// Lenstra-Lenstra-Lovasz reduction of the rows of `b`.
pub fn lll(b: &mut [Vec<f64>], delta: f64) {
    let n = b.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>();
    let gram_schmidt = |b: &[Vec<f64>]| {
        let mut bs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut norms = vec![0.0; n];
        for i in 0..n {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &bs[j]) / norms[j] } else { 0.0 };
                for (x, y) in v.iter_mut().zip(&bs[j]) {
                    *x -= mu[i][j] * y;
                }
            }
            norms[i] = dot(&v, &v);
            bs.push(v);
        }
        (mu, norms)
    };
    let (mut mu, mut norms) = gram_schmidt(b);
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let (head, tail) = b.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= q * y;
                }
                (mu, norms) = gram_schmidt(b);
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            (mu, norms) = gram_schmidt(b);
            k = (k - 1).max(1);
        }
    }
}

/// Candidate counts `k_1` for the first prime from a reduced Kannan embedding: the lattice
/// vector `k_1 b_1 - sum k_p b_p + b_target` is short exactly when `k_1 beta_p - k_p`
/// approximates `-c_p` for every other prime.
fn lattice_candidates(beta: &[f64], c: &[f64], scales: &[f64], bound: f64) -> Vec<f64> {
    let k = beta.len();
    let dim = k + 2;
    let mut basis = vec![vec![0.0; dim]; k + 2];
    basis[0][0] = 1.0 / bound;
    for p in 0..k {
        basis[0][p + 1] = scales[p] * beta[p];
        basis[p + 1][p + 1] = scales[p];
        basis[k + 1][p + 1] = scales[p] * c[p];
    }
    basis[k + 1][k + 1] = 1.0;
    lll(&mut basis, 0.99);
    // small combinations of the reduced rows with embedding coefficient +-1
    let rows = basis.len();
    let mut out = Vec::new();
    let range: i64 = if rows <= 6 { 2 } else { 1 };
    let mut coeffs = vec![-range; rows];
    loop {
        let v: Vec<f64> = (0..dim).map(|d| (0..rows).map(|r| coeffs[r] as f64 * basis[r][d]).sum()).collect();
        let emb = v[k + 1];
        if (emb.abs() - 1.0).abs() < 1e-6 {
            out.push((v[0] * bound * emb.signum()).round());
        }
        let mut i = 0;
        while i < rows {
            coeffs[i] += 1;
            if coeffs[i] <= range {
                break;
            }
            coeffs[i] = -range;
            i += 1;
        }
        if i == rows {
            break;
        }
    }
    out
}

/// A real `t` meeting the tolerance: exact hits first, a grid scan over `[0, grid_limit]`
/// for few primes, then lattice reduction on `(log p / 2 pi)_p`.
pub fn simul_approx(target: &PhaseTarget, tol: Tolerance, params: ApproxParams) -> Result<Approximation> {
    let done = |t: f64, method| {
        let t = polish(target, tol, t);
        Approximation { t, discrepancy: discrepancy(target, tol, t), phase_errors: phase_errors(target, t), method }
    };
    let mut best = (f64::NAN, f64::INFINITY);
    for &t in &target.shifts {
        let d = discrepancy(target, tol, t);
        if d <= tol.value() {
            return Ok(Approximation { t, discrepancy: d, phase_errors: phase_errors(target, t), method: ApproxMethod::Exact });
        }
        if d < best.1 {
            best = (t, d);
        }
    }
    if target.primes.len() <= params.max_grid_primes {
        let (t, d) = grid_scan(target, tol, params.grid_limit);
        if d <= tol.value() {
            return Ok(done(t, ApproxMethod::Grid));
        }
        if d < best.1 {
            best = (t, d);
        }
    }

    // fix the first prime exactly: t = (theta_1 + k_1) / alpha_1
    let alpha: Vec<f64> = target.primes.iter().map(|&p| (p as f64).ln() / TAU).collect();
    let theta: Vec<f64> = target.shifts.iter().zip(&alpha).map(|(t, a)| t * a).collect();
    let beta: Vec<f64> = alpha[1..].iter().map(|a| a / alpha[0]).collect();
    let c: Vec<f64> = theta[1..].iter().zip(&beta).map(|(th, b)| theta[0] * b - th).collect();
    let k = beta.len();
    let per_prime = |p: usize, slack: f64| -> f64 {
        match tol {
            Tolerance::MaxPhase(x) => slack * TAU / x,
            Tolerance::Weighted(x) => slack * TAU * target.weights[p + 1] * k.max(1) as f64 / x,
        }
    };
    let expected = 1.0 / density(target, tol).max(1e-300);
    let mut bound = (expected / 100.0).max(1.0);
    while bound <= params.max_t * alpha[0] {
        for slack in [1.0, 2.0, 4.0] {
            let scales: Vec<f64> = (0..k).map(|p| per_prime(p, slack)).collect();
            for k1 in lattice_candidates(&beta, &c, &scales, bound) {
                let t = (theta[0] + k1) / alpha[0];
                let d = discrepancy(target, tol, t);
                if d < best.1 {
                    best = (t, d);
                }
                if d <= tol.value() {
                    let a = done(t, ApproxMethod::Lattice);
                    if a.discrepancy <= tol.value() {
                        return Ok(a);
                    }
                }
            }
        }
        bound *= 10.0;
    }
    Err(Error::Approximation { t: best.0, best: best.1, density: density(target, tol) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_targets() {
        let t = PhaseTarget::unweighted(vec![2, 3, 5], vec![0.0; 3]).unwrap();
        let a = simul_approx(&t, Tolerance::MaxPhase(0.01), ApproxParams::default()).unwrap();
        assert_eq!(a.t, 0.0);
        let t = PhaseTarget::unweighted(vec![2, 3, 5, 7], vec![4.25; 4]).unwrap();
        let a = simul_approx(&t, Tolerance::MaxPhase(0.01), ApproxParams::default()).unwrap();
        assert_eq!(a.t, 4.25);
    }

    #[test]
    fn grid_for_two_primes() {
        let t = PhaseTarget::unweighted(vec![2, 3], vec![0.3, 0.9]).unwrap();
        let a = simul_approx(&t, Tolerance::MaxPhase(0.05), ApproxParams::default()).unwrap();
        assert_eq!(a.method, ApproxMethod::Grid);
        assert!(a.discrepancy <= 0.05);
    }

    #[test]
    fn lattice_for_five_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3 {
            let shifts: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
            let t = PhaseTarget::unweighted(vec![2, 3, 5, 7, 11], shifts).unwrap();
            let a = simul_approx(&t, Tolerance::MaxPhase(0.01), ApproxParams::default()).unwrap();
            assert_eq!(a.method, ApproxMethod::Lattice);
            assert!(a.phase_errors.iter().all(|e| e.abs() <= 0.01));
        }
    }

    #[test]
    fn weights_aggregate_exponents() {
        let s = FiniteDirichletSeries::new([(1, Complex64::new(1.0, 0.0)), (4, Complex64::new(2.0, 0.0)), (6, Complex64::new(1.0, 0.0))]);
        let w = prime_weights(&s, 1.0);
        assert!((w[&2] - (2.0 * 2.0 / 4.0 + 1.0 / 6.0)).abs() < 1e-15);
        assert!((w[&3] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn lll_reduces_known_basis() {
        let mut b = vec![vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0], vec![3.0, 5.0, 6.0]];
        lll(&mut b, 0.75);
        let norms: Vec<f64> = b.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).collect();
        assert!(norms[0] <= 3.0);
    }
}
