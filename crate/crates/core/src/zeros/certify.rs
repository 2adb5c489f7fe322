use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::Target;
use crate::error::{Error, Result};

/// A disk `|s - center| <= rho` whose boundary winding number of `F` is positive, with
/// `gamma` (certified lower bound of `|F|` on the circle) above the evaluation error.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCertificate {
    pub center: Complex64,
    pub rho: f64,
    pub winding: i64,
    pub gamma: f64,
    pub errbound: f64,
    pub shift_t: f64,
    pub samples: usize,
}

impl ZeroCertificate {
    pub const CSV_HEADER: &'static str = "sigma_center,t_center,rho,winding,gamma,errbound,shift_t";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.15},{:.15},{:.6e},{},{:.6e},{:.6e},{}",
            self.center.re, self.center.im, self.rho, self.winding, self.gamma, self.errbound, self.shift_t
        )
    }
}

/// Outcome of a contour check.
#[derive(Clone, Debug, PartialEq)]
pub enum Certification {
    Certified(ZeroCertificate),
    /// Winding number 0 with `gamma > errbound`: no zero inside.
    NoZero { gamma: f64, errbound: f64 },
    /// `gamma <= errbound`, sampling budget exhausted or a mesh disagreement; says
    /// nothing about zeros.
    Inconclusive { gamma: f64, errbound: f64, reason: String },
}

impl Certification {
    pub fn certificate(&self) -> Option<&ZeroCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyParams {
    pub initial_samples: usize,
    pub max_samples: usize,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams { initial_samples: 64, max_samples: 1 << 14 }
    }
}

struct Sample {
    angle: f64,
    value: Complex64,
    err: f64,
}

fn sample<T: Target + ?Sized>(target: &T, center: Complex64, rho: f64, angle: f64) -> Result<Sample> {
    let (value, err) = target.eval(center + Complex64::from_polar(rho, angle))?;
    Ok(Sample { angle, value, err })
}

/// Lower bound for `|F|` on each arc between consecutive samples: the smaller endpoint
/// minus half the arc times a slope bound (twice the largest observed chord slope).
fn arc_bounds(samples: &[Sample], rho: f64) -> Vec<f64> {
    let n = samples.len();
    let arc = |k: usize| {
        let a = samples[k].angle;
        let b = if k + 1 == n { samples[0].angle + TAU } else { samples[k + 1].angle };
        rho * (b - a)
    };
    let slope = (0..n).map(|k| (samples[(k + 1) % n].value - samples[k].value).norm() / arc(k)).fold(0.0, f64::max);
    (0..n)
        .map(|k| samples[k].value.norm().min(samples[(k + 1) % n].value.norm()) - slope * arc(k))
        .collect()
}

fn winding(samples: &[Sample]) -> (i64, f64) {
    let n = samples.len();
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for k in 0..n {
        let step = (samples[(k + 1) % n].value / samples[k].value).arg();
        worst = worst.max(step.abs());
        total += step;
    }
    ((total / TAU).round() as i64, worst)
}

/// Winding number of `F` around 0 on `|s - center| = rho`, by argument tracking with
/// refinement until every sample-to-sample argument change is below `pi/4` and the
/// certified minimum exceeds the evaluation error; rechecked on a doubled mesh.
pub fn winding_certify<T: Target + ?Sized>(target: &T, center: Complex64, rho: f64, params: CertifyParams) -> Result<Certification> {
    if !(rho > 0.0) || center.re - rho <= target.sigma_floor() {
        return Err(Error::Domain(format!("disk at {center} radius {rho} reaches Re(s) <= {}", target.sigma_floor())));
    }
    let n0 = params.initial_samples.max(8);
    let mut samples: Vec<Sample> = (0..n0).map(|k| sample(target, center, rho, TAU * k as f64 / n0 as f64)).collect::<Result<_>>()?;
    loop {
        let errbound = samples.iter().map(|s| s.err).fold(0.0, f64::max);
        let bounds = arc_bounds(&samples, rho);
        let n = samples.len();
        let flagged: Vec<usize> = (0..n)
            .filter(|&k| {
                let step = (samples[(k + 1) % n].value / samples[k].value).arg().abs();
                step >= PI / 4.0 || bounds[k] <= errbound
            })
            .collect();
        let gamma = bounds.iter().copied().fold(f64::INFINITY, f64::min);
        if flagged.is_empty() {
            break;
        }
        if n + flagged.len() > params.max_samples {
            return Ok(Certification::Inconclusive { gamma: gamma.max(0.0), errbound, reason: format!("sampling budget {} exhausted", params.max_samples) });
        }
        let mut next = Vec::with_capacity(n + flagged.len());
        let mut f = flagged.iter().peekable();
        for k in 0..n {
            let a = samples[k].angle;
            let b = if k + 1 == n { TAU } else { samples[k + 1].angle };
            let split = f.peek() == Some(&&k);
            next.push(Sample { angle: a, value: samples[k].value, err: samples[k].err });
            if split {
                f.next();
                next.push(sample(target, center, rho, 0.5 * (a + b))?);
            }
        }
        samples = next;
    }
    let errbound = samples.iter().map(|s| s.err).fold(0.0, f64::max);
    let gamma = arc_bounds(&samples, rho).into_iter().fold(f64::INFINITY, f64::min);
    let (w, _) = winding(&samples);

    // doubled mesh: every arc split once more
    let n = samples.len();
    let mut doubled = Vec::with_capacity(2 * n);
    for k in 0..n {
        let a = samples[k].angle;
        let b = if k + 1 == n { TAU } else { samples[k + 1].angle };
        doubled.push(Sample { angle: a, value: samples[k].value, err: samples[k].err });
        doubled.push(sample(target, center, rho, 0.5 * (a + b))?);
    }
    let (w2, _) = winding(&doubled);
    let min2 = doubled.iter().map(|s| s.value.norm()).fold(f64::INFINITY, f64::min);
    let errbound = errbound.max(doubled.iter().map(|s| s.err).fold(0.0, f64::max));
    if w2 != w || min2 < gamma {
        return Ok(Certification::Inconclusive { gamma, errbound, reason: format!("doubled mesh gives winding {w2} (min {min2:.3e}) against {w}") });
    }
    if gamma <= errbound {
        return Ok(Certification::Inconclusive { gamma, errbound, reason: "contour minimum below evaluation error".into() });
    }
    if w <= 0 {
        return Ok(Certification::NoZero { gamma, errbound });
    }
    Ok(Certification::Certified(ZeroCertificate { center, rho, winding: w, gamma, errbound, shift_t: target.shift(), samples: doubled.len() }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combination::{CombinationPolynomial, FiniteDirichletSeries};
    use crate::lfunc::LFunction;
    use crate::zeros::{FnTarget, PlainCombination};

    #[test]
    fn linear_target() {
        let z0 = Complex64::new(1.02, 5.0);
        let t = FnTarget { f: move |s: Complex64| s - z0, floor: 1.0 };
        let c = winding_certify(&t, z0, 0.01, CertifyParams::default()).unwrap();
        let cert = c.certificate().unwrap();
        assert_eq!(cert.winding, 1);
        assert!(cert.gamma > cert.errbound && cert.gamma <= 0.01);
        let off = winding_certify(&t, z0 + 0.05, 0.01, CertifyParams::default()).unwrap();
        assert!(matches!(off, Certification::NoZero { .. }));
    }

    #[test]
    fn double_zero_counts_two() {
        let z0 = Complex64::new(1.5, 2.0);
        let t = FnTarget { f: move |s: Complex64| (s - z0) * (s - z0 - 0.001), floor: 1.0 };
        let c = winding_certify(&t, z0, 0.01, CertifyParams::default()).unwrap();
        assert_eq!(c.certificate().unwrap().winding, 2);
    }

    #[test]
    fn zeta_has_no_zero() {
        let z = LFunction::character(1, 0, 10).unwrap();
        let p = CombinationPolynomial::from_terms(1, [(vec![1], FiniteDirichletSeries::one())]).unwrap();
        let target = PlainCombination { p, lfs: vec![z] };
        for c in [Complex64::new(1.1, 0.5), Complex64::new(1.3, 14.1)] {
            let r = winding_certify(&target, c, 0.05, CertifyParams::default()).unwrap();
            assert!(matches!(r, Certification::NoZero { gamma, .. } if gamma > 0.0), "{r:?}");
        }
    }

    #[test]
    fn disk_must_stay_right_of_floor() {
        let t = FnTarget { f: |s: Complex64| s, floor: 1.0 };
        assert!(winding_certify(&t, Complex64::new(1.005, 0.0), 0.01, CertifyParams::default()).is_err());
    }
}
