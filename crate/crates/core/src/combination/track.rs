use num_complex::Complex64;

use super::poly::{specialize, CombinationPolynomial, SpecializedPolynomial};
use super::roots::{poly_roots, restrict_to_line};
use crate::error::{Error, Result};
use crate::lfunc::LFunction;
use crate::series::EvalPoint;

#[derive(Clone, Copy, Debug)]
pub struct TrackParams {
    /// Euler cutoff used in the specialization (0 for `h_s` of `P` itself).
    pub y: u64,
    /// Modulus window `[1/R, R]` every coordinate must stay in.
    pub window: f64,
    pub initial_steps: usize,
    pub min_step: f64,
    /// Contour samples for the Rouche check.
    pub samples: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams { y: 0, window: 1e3, initial_steps: 16, min_step: 1e-12, samples: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct TrackResult {
    pub z: Vec<Complex64>,
    pub sigma: f64,
    pub steps: usize,
    /// Smallest ratio (contour minimum) / (coefficient perturbation) seen over accepted steps.
    pub min_margin: f64,
    pub base: Vec<Complex64>,
    pub dir: Vec<Complex64>,
    pub tau: Complex64,
}

fn point(base: &[Complex64], dir: &[Complex64], tau: Complex64) -> Vec<Complex64> {
    base.iter().zip(dir).map(|(b, u)| b + tau * u).collect()
}

/// `sum_d prod_j (|b_j| + (|tau| + r) |u_j|)^{d_j}`: the factor by which a per-coefficient
/// perturbation bounds the change of `p(t) = h(b + t u)` on `|t - tau| <= r`.
fn perturbation_weight(h: &SpecializedPolynomial, base: &[Complex64], dir: &[Complex64], tau: Complex64, r: f64) -> f64 {
    let reach: Vec<f64> = base.iter().zip(dir).map(|(b, u)| b.norm() + (tau.norm() + r) * u.norm()).collect();
    h.terms
        .iter()
        .map(|(d, _)| d.iter().zip(&reach).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
        .sum()
}

/// Minimum of `|p|` over `samples` points of the circle `|t - tau| = r`, and the winding
/// number of `p` around it.
fn circle_scan(coeffs: &[Complex64], tau: Complex64, r: f64, samples: usize) -> (f64, i64) {
    let eval = |t: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * t + a);
    let mut min = f64::INFINITY;
    let mut total = 0.0;
    let first = eval(tau + r);
    let mut prev = first;
    for k in 1..=samples {
        let v = if k == samples { first } else { eval(tau + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / samples as f64)) };
        min = min.min(v.norm());
        total += (v / prev).arg();
        prev = v;
    }
    (min, (total / std::f64::consts::TAU).round() as i64)
}

/// Largest `delta` such that changing every coefficient of `h` by at most `delta` keeps
/// exactly one zero of `t -> h(base + t dir)` within `r` of `tau` (0 if the circle
/// around `tau` does not isolate a simple zero).
pub fn rouche_budget(h: &SpecializedPolynomial, base: &[Complex64], dir: &[Complex64], tau: Complex64, r: f64) -> f64 {
    let coeffs = restrict_to_line(h, base, dir);
    let (min, winding) = circle_scan(&coeffs, tau, r, 256);
    if winding != 1 {
        return 0.0;
    }
    // sampled minimum; halve it to cover the gaps between samples
    0.5 * min / perturbation_weight(h, base, dir, tau, r)
}

/// Isolation radius around `tau`: a quarter of the distance to the nearest other zero.
fn isolation_radius(coeffs: &[Complex64], tau: Complex64, scale: f64) -> f64 {
    let roots = poly_roots(coeffs);
    let mut dists: Vec<f64> = roots.iter().map(|r| (r - tau).norm()).collect();
    dists.sort_by(f64::total_cmp);
    let cap = 0.05 * scale;
    match dists.get(1) {
        Some(&d) => (0.25 * d).min(cap),
        None => cap,
    }
}

fn newton(coeffs: &[Complex64], mut tau: Complex64) -> (Complex64, f64) {
    let mut first = 0.0;
    for it in 0..50 {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &a in coeffs.iter().rev() {
            dp = dp * tau + p;
            p = p * tau + a;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if it == 0 {
            first = step.norm();
        }
        tau -= step;
        if step.norm() <= 1e-16 * (1.0 + tau.norm()) {
            break;
        }
    }
    (tau, first)
}

/// Follows a zero of `h_{sigma + i t0}` from `sigma = 1` to `sigma_target` along the line
/// through `z_start` in the direction of the conjugate gradient, verifying the Rouche
/// condition at every step.
pub fn track_root(
    p: &CombinationPolynomial,
    lfs: &[LFunction],
    t0: f64,
    z_start: &[Complex64],
    sigma_target: f64,
    params: TrackParams,
) -> Result<TrackResult> {
    if sigma_target < 1.0 {
        return Err(Error::Domain(format!("sigma_target {sigma_target} < 1")));
    }
    let spec = |sigma: f64| specialize(p, lfs, EvalPoint::new(sigma, t0), params.y);
    let h0 = spec(1.0)?;
    let scale0 = h0.scale_at(z_start);
    if h0.eval(z_start).norm() > 1e-8 * scale0.max(1e-300) {
        return Err(Error::Precondition("z_start is not a zero of h at sigma = 1".into()));
    }
    let grad = h0.gradient(z_start);
    let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    let dir: Vec<Complex64> = if gnorm > 0.0 {
        grad.iter().map(|g| g.conj() / gnorm).collect()
    } else {
        let mut e = vec![Complex64::new(0.0, 0.0); p.n()];
        e[p.n() - 1] = Complex64::new(1.0, 0.0);
        e
    };
    let base = z_start.to_vec();
    let in_window = |z: &[Complex64]| z.iter().all(|v| v.norm() >= 1.0 / params.window && v.norm() <= params.window);
    if !in_window(&base) {
        return Err(Error::Window { sigma: 1.0, max_sigma: 1.0 });
    }

    let mut sigma = 1.0;
    let mut tau = Complex64::new(0.0, 0.0);
    let mut h = h0;
    let mut step = (sigma_target - 1.0) / params.initial_steps.max(1) as f64;
    let mut steps = 0;
    let mut min_margin = f64::INFINITY;
    while sigma < sigma_target {
        let next_sigma = (sigma + step).min(sigma_target);
        let h_next = spec(next_sigma)?;
        let coeffs = restrict_to_line(&h, &base, &dir);
        let z_scale = 1.0 + point(&base, &dir, tau).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let r = isolation_radius(&coeffs, tau, z_scale);
        let pert: f64 = h
            .terms
            .iter()
            .zip(&h_next.terms)
            .map(|((d, a), (_, b))| {
                (a - b).norm()
                    * d.iter()
                        .zip(base.iter().zip(&dir))
                        .map(|(&e, (b0, u))| (b0.norm() + (tau.norm() + r) * u.norm()).powi(e as i32))
                        .product::<f64>()
            })
            .sum();
        let (min, winding) = circle_scan(&coeffs, tau, r, params.samples);
        let next_coeffs = restrict_to_line(&h_next, &base, &dir);
        let (new_tau, first) = newton(&next_coeffs, tau);
        let ok = winding == 1 && min > 2.0 * pert && first <= 0.1 * r && (new_tau - tau).norm() < r;
        if !ok {
            step *= 0.5;
            if step < params.min_step {
                return Err(Error::Budget { steps, residual: first });
            }
            continue;
        }
        let z = point(&base, &dir, new_tau);
        if !in_window(&z) {
            return Err(Error::Window { sigma: next_sigma, max_sigma: sigma });
        }
        min_margin = min_margin.min(if pert > 0.0 { min / pert } else { f64::INFINITY });
        sigma = next_sigma;
        tau = new_tau;
        h = h_next;
        steps += 1;
        step *= 2.0;
    }
    Ok(TrackResult { z: point(&base, &dir, tau), sigma, steps, min_margin, base, dir, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combination::FiniteDirichletSeries;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_coefficients_stay_put() {
        let p = CombinationPolynomial::from_terms(
            1,
            [(vec![1], FiniteDirichletSeries::one()), (vec![0], FiniteDirichletSeries::constant(c(-2.0)))],
        )
        .unwrap();
        let r = track_root(&p, &[], 0.0, &[c(2.0)], 1.05, TrackParams::default()).unwrap();
        assert!((r.z[0] - c(2.0)).norm() < 1e-14);
        assert_eq!(r.sigma, 1.05);
    }

    #[test]
    fn sigma_dependent_coefficient() {
        // (1 - 2^{-s}) x - 1: zero at x = 1/(1 - 2^{-sigma})
        let p = CombinationPolynomial::from_terms(
            1,
            [
                (vec![1], FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-1.0))])),
                (vec![0], FiniteDirichletSeries::constant(c(-1.0))),
            ],
        )
        .unwrap();
        let r = track_root(&p, &[], 0.0, &[c(2.0)], 1.2, TrackParams::default()).unwrap();
        let expect = 1.0 / (1.0 - 2f64.powf(-1.2));
        assert!((r.z[0] - c(expect)).norm() < 1e-12);
        assert!(r.min_margin > 2.0);
    }

    #[test]
    fn window_violation_reports_sigma() {
        let p = CombinationPolynomial::from_terms(
            1,
            [
                (vec![1], FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-0.5))])),
                (vec![0], FiniteDirichletSeries::constant(c(-1.0))),
            ],
        )
        .unwrap();
        // zero at 1/(1 - 2^{-sigma}/2), falling from 4/3 at sigma = 1 to 1.30 near sigma = 1.1
        let params = TrackParams { window: 1.31, ..TrackParams::default() };
        let err = track_root(&p, &[], 0.0, &[c(4.0 / 3.0)], 1.1, params).unwrap_err();
        assert!(matches!(err, Error::Window { .. }));
    }

    #[test]
    fn budget_bounds_root_motion() {
        let h = SpecializedPolynomial::new(2, vec![(vec![1, 1], c(1.0)), (vec![0, 0], c(-4.0)), (vec![1, 0], c(0.5))]);
        let base = vec![c(2.0), c(1.5)];
        assert!(h.eval(&base).norm() < 1e-14);
        let dir = vec![c(0.0), c(1.0)];
        let r = 0.01;
        let delta = rouche_budget(&h, &base, &dir, c(0.0), r);
        assert!(delta > 0.0);
        let perturbed = SpecializedPolynomial::new(
            2,
            h.terms.iter().enumerate().map(|(k, (d, a))| (d.clone(), a + Complex64::from_polar(0.99 * delta, k as f64))).collect(),
        );
        let (tau, _) = newton(&restrict_to_line(&perturbed, &base, &dir), c(0.0));
        assert!(tau.norm() < r);
    }
}
