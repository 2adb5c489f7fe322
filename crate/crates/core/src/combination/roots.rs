use num_complex::Complex64;
use rand::Rng;

use super::poly::SpecializedPolynomial;
use crate::error::{Error, Result};

/// Relative residual accepted for a root of `h`.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Minimum modulus accepted for root coordinates.
pub const MIN_COORDINATE: f64 = 1e-4;

const LINE_BUDGET: usize = 64;

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// All complex roots of `sum c_k x^k` (coefficients low to high) by Aberth-Ehrlich
/// iteration, each polished by Newton steps.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * max {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    // Cauchy bound for the initial circle
    let radius = 1.0 + c[..deg].iter().map(|a| (a / lead).norm()).fold(0.0, f64::max);
    let r0 = radius.min(1e6).max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(r0 * 0.5, std::f64::consts::TAU * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&c, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *r - p / dp;
            if horner(&c, next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    z
}

/// Coefficients in `tau` of `h(base + tau * dir)`.
pub fn restrict_to_line(h: &SpecializedPolynomial, base: &[Complex64], dir: &[Complex64]) -> Vec<Complex64> {
    let deg = h.total_degree() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (d, c) in &h.terms {
        let mut poly = vec![*c];
        for j in 0..h.n {
            for _ in 0..d[j] {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
                for (k, &a) in poly.iter().enumerate() {
                    next[k] += a * base[j];
                    next[k + 1] += a * dir[j];
                }
                poly = next;
            }
        }
        for (k, a) in poly.into_iter().enumerate() {
            out[k] += a;
        }
    }
    out
}

fn accept(h: &SpecializedPolynomial, y: &[Complex64]) -> bool {
    y.iter().all(|v| v.norm() >= MIN_COORDINATE && v.re.is_finite() && v.im.is_finite())
        && h.eval(y).norm() <= ROOT_TOLERANCE * h.scale_at(y)
}

fn try_line(h: &SpecializedPolynomial, base: &[Complex64], dir: &[Complex64]) -> Option<Vec<Complex64>> {
    let coeffs = restrict_to_line(h, base, dir);
    let mut roots = poly_roots(&coeffs);
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    roots
        .into_iter()
        .map(|tau| base.iter().zip(dir).map(|(b, u)| b + tau * u).collect::<Vec<_>>())
        .find(|y| accept(h, y))
}

/// A zero of `h` with every coordinate nonzero. Tries the diagonal through the
/// origin, then coordinate lines through `(1, ..., 1)` (last variable first), then
/// random lines through points on circles of radius `2^k`.
pub fn nonzero_root<R: Rng>(h: &SpecializedPolynomial, rng: &mut R) -> Result<Vec<Complex64>> {
    if h.nonzero_terms() <= 1 {
        return Err(Error::Monomial("h has a single term and no zero with nonzero coordinates".into()));
    }
    let n = h.n;
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let ones = vec![Complex64::new(1.0, 0.0); n];
    if let Some(y) = try_line(h, &zero, &ones) {
        return Ok(y);
    }
    for j in (0..n).rev() {
        let mut dir = zero.clone();
        dir[j] = Complex64::new(1.0, 0.0);
        if let Some(y) = try_line(h, &ones, &dir) {
            return Ok(y);
        }
    }
    for _ in 0..LINE_BUDGET {
        let base: Vec<Complex64> = (0..n)
            .map(|_| {
                let k = rng.gen_range(-2i32..=2);
                Complex64::from_polar(2f64.powi(k), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let mut dir: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = dir.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|v| *v /= norm);
        if let Some(y) = try_line(h, &base, &dir) {
            return Ok(y);
        }
    }
    Err(Error::RootSearch { attempts: LINE_BUDGET + n + 1 })
}
