//! Truncated Dirichlet series, local logarithms and partial Euler products in
//! `Re(s) > 1`, each returned with a rigorous bound on what the truncation omits.

mod hurwitz;

use std::collections::BTreeMap;

use num_complex::Complex64;

pub use hurwitz::hurwitz_zeta;

use crate::error::{Error, Result};
use crate::lfunc::{DirichletCharacter, EulerFactor, LFunction};
use crate::primes::{for_each_prime, prime_tail_bound};

/// `s = sigma + i t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    pub sigma: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        EvalPoint { sigma, t }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    pub fn shifted(&self, dt: f64) -> Self {
        EvalPoint { sigma: self.sigma, t: self.t + dt }
    }
}

impl From<Complex64> for EvalPoint {
    fn from(s: Complex64) -> Self {
        EvalPoint { sigma: s.re, t: s.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMethod {
    /// Rankin's trick against `zeta(sigma')^r`.
    Rankin,
    /// Partial summation against bounded character sums.
    Abel,
    /// Comparison of a prime sum with an explicit integral.
    Integral,
    /// Geometric series.
    Geometric,
    /// Euler-Maclaurin remainder.
    EulerMaclaurin,
    /// Nothing omitted.
    Exact,
}

impl TailMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            TailMethod::Rankin => "rankin",
            TailMethod::Abel => "abel",
            TailMethod::Integral => "integral",
            TailMethod::Geometric => "geometric",
            TailMethod::EulerMaclaurin => "euler-maclaurin",
            TailMethod::Exact => "exact",
        }
    }
}

/// Upper bound on the absolute mass a computation leaves out.
#[derive(Clone, Debug, PartialEq)]
pub struct TailBound {
    pub value: f64,
    pub method: TailMethod,
    pub params: Vec<(&'static str, f64)>,
}

impl TailBound {
    pub fn zero() -> Self {
        TailBound { value: 0.0, method: TailMethod::Exact, params: Vec::new() }
    }

    fn new(value: f64, method: TailMethod, params: Vec<(&'static str, f64)>) -> Self {
        TailBound { value, method, params }
    }
}

/// `sum_{n<=N} n^{-sigma} + N^{1-sigma}/(sigma-1)`, an upper bound for `zeta(sigma)`.
pub fn zeta_upper(sigma: f64) -> f64 {
    assert!(sigma > 1.0);
    const N: u32 = 1000;
    let head: f64 = (1..=N).map(|n| (n as f64).powf(-sigma)).sum();
    (head + (N as f64).powf(1.0 - sigma) / (sigma - 1.0)) * (1.0 + 1e-14)
}

/// `min` over 16 log-spaced `sigma'` in `(1, sigma)` of `M^{sigma'-sigma} zeta(sigma')^r`,
/// which dominates `sum_{m>M} d_r(m) m^{-sigma}`.
fn rankin_tail(m: usize, sigma: f64, degree: usize) -> TailBound {
    let lm = (m.max(1) as f64).ln();
    let mut best = (f64::INFINITY, sigma);
    for i in 0..16 {
        // sigma' - 1 = (sigma - 1) * 10^{-3 (16 - i)/16 ... }: log-spaced in (0, sigma - 1)
        let frac = 10f64.powf(-3.0 * (15 - i) as f64 / 15.0) * (1.0 - 1e-3);
        let sp = 1.0 + (sigma - 1.0) * frac;
        let v = ((sp - sigma) * lm).exp() * zeta_upper(sp).powi(degree as i32);
        if v < best.0 {
            best = (v, sp);
        }
    }
    TailBound::new(best.0, TailMethod::Rankin, vec![("sigma_prime", best.1), ("M", m as f64)])
}

/// `|sum_{m>M} chi(m) m^{-s}| <= |s| B M^{-sigma} / sigma`, `B` bounding every
/// character sum over an interval.
fn abel_tail(chi: &DirichletCharacter, m: usize, s: EvalPoint) -> TailBound {
    let mut partial = Complex64::new(0.0, 0.0);
    let mut max = 0.0f64;
    for r in 1..=chi.modulus() {
        partial += chi.value(r);
        max = max.max(partial.norm());
    }
    let b = 2.0 * max;
    let value = s.s().norm() * b * (m as f64).powf(-s.sigma) / s.sigma;
    TailBound::new(value, TailMethod::Abel, vec![("B", b), ("M", m as f64)])
}

/// Neumaier-compensated complex sum that also tracks `sum |x|`.
#[derive(Default)]
struct Accumulator {
    sum: Complex64,
    comp: Complex64,
    abs: f64,
}

impl Accumulator {
    fn add(&mut self, x: Complex64) {
        self.abs += x.norm();
        let t = self.sum + x;
        for (c, (a, b, tt)) in [(&mut self.comp.re, (self.sum.re, x.re, t.re)), (&mut self.comp.im, (self.sum.im, x.im, t.im))] {
            *c += if a.abs() >= b.abs() { (a - tt) + b } else { (b - tt) + a };
        }
        self.sum = t;
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }

    fn rounding(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs
    }
}

/// `sum_{m<=M} lambda(m) m^{-s}` with a bound on the omitted tail (plus rounding).
pub fn dirichlet_sum(lf: &LFunction, s: EvalPoint, m: usize) -> Result<(Complex64, TailBound)> {
    if s.sigma <= 1.0 {
        return Err(Error::Domain(format!("dirichlet_sum needs sigma > 1, got {}", s.sigma)));
    }
    if m == 0 || (m > lf.table.len() && !lf.table.is_periodic()) {
        return Err(Error::Precondition(format!("M = {m} outside 1..={}", lf.table.len())));
    }
    let values = lf.table.dense_prefix(m);
    let mut acc = Accumulator::default();
    let st = s.s();
    for (i, &v) in values.iter().enumerate() {
        if v.norm() != 0.0 {
            acc.add(if i == 0 { v } else { v * (-st * ((i + 1) as f64).ln()).exp() });
        }
    }
    let mut tail = rankin_tail(m, s.sigma, lf.degree());
    if let Some(chi) = lf.character_data() {
        if !chi.is_principal() {
            let abel = abel_tail(&chi, m, s);
            if abel.value < tail.value {
                tail = abel;
            }
        }
    }
    tail.value += acc.rounding();
    Ok((acc.value(), tail))
}

/// Default number of local-log terms: `ceil(64 / log2 p)`.
pub fn default_kmax(p: u64) -> u32 {
    (64.0 / (p as f64).log2()).ceil() as u32
}

/// `sum_{k<=kmax} (sum_l alpha_l^k)/k p^{-ks}` with its geometric tail.
pub fn local_log(factor: &EulerFactor, s: EvalPoint, kmax: u32) -> Result<(Complex64, TailBound)> {
    if s.sigma < 1.0 {
        return Err(Error::Domain(format!("local_log needs sigma >= 1, got {}", s.sigma)));
    }
    if factor.roots.is_empty() {
        return Ok((Complex64::new(0.0, 0.0), TailBound::zero()));
    }
    let p = factor.p as f64;
    let ps = (-s.s() * p.ln()).exp();
    let mut x = 0.0f64;
    let mut total = Complex64::new(0.0, 0.0);
    for &alpha in &factor.roots {
        let z = alpha * ps;
        x = x.max(z.norm());
        let mut pw = z;
        let mut sum = z;
        for k in 2..=kmax {
            pw *= z;
            sum += pw / k as f64;
        }
        total += sum;
    }
    if x >= 1.0 {
        return Err(Error::Domain(format!("divergent local series at p = {}", factor.p)));
    }
    let r = factor.roots.len() as f64;
    let k1 = (kmax + 1) as f64;
    let tail = r * x.powf(k1) / (k1 * (1.0 - x));
    Ok((total, TailBound::new(tail, TailMethod::Geometric, vec![("kmax", kmax as f64), ("x", x)])))
}

/// Per-prime shifts `t_p`: a default plus explicit overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Shifts {
    pub default: f64,
    pub overrides: BTreeMap<u64, f64>,
}

impl Shifts {
    pub fn none() -> Self {
        Shifts::default()
    }

    pub fn constant(t: f64) -> Self {
        Shifts { default: t, overrides: BTreeMap::new() }
    }

    pub fn get(&self, p: u64) -> f64 {
        self.overrides.get(&p).copied().unwrap_or(self.default)
    }
}

/// Explicit bound on `sum_{p>x} |log L_p(s)|` for a degree-`r` Euler product:
/// `|log L_p| <= -r log(1 - p^{-sigma}) <= r p^{-sigma} / (1 - p^{-sigma})`.
pub fn euler_tail_bound(x: f64, sigma: f64, degree: usize) -> f64 {
    let x = x.max(1.0);
    degree as f64 * prime_tail_bound(x, sigma) / (1.0 - (x + 1.0).max(2.0).powf(-sigma))
}

/// `sum_{lo < p <= hi} log L_p(sigma + i(t + t_p))`; with `tail` set, the bound also
/// covers all primes beyond `hi` (evaluated at any shifts).
pub fn euler_log_product(
    lf: &LFunction,
    s: EvalPoint,
    lo: u64,
    hi: u64,
    shifts: &Shifts,
    tail: bool,
) -> Result<(Complex64, TailBound)> {
    if tail && s.sigma <= 1.0 {
        return Err(Error::Domain(format!("Euler tail needs sigma > 1, got {}", s.sigma)));
    }
    if s.sigma < 1.0 {
        return Err(Error::Domain(format!("Euler product needs sigma >= 1, got {}", s.sigma)));
    }
    if hi as usize > lf.table.len() && !lf.table.is_periodic() {
        return Err(Error::Precondition(format!("prime range reaches {hi} beyond table length {}", lf.table.len())));
    }
    let mut acc = Accumulator::default();
    let mut local = 0.0;
    let mut err = None;
    for_each_prime(lo, hi, |p| {
        if err.is_some() {
            return;
        }
        let res = lf
            .euler_factor(p)
            .and_then(|f| local_log(&f, s.shifted(shifts.get(p)), default_kmax(p)));
        match res {
            Ok((v, tb)) => {
                acc.add(v);
                local += tb.value;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut bound = TailBound::new(local + acc.rounding(), TailMethod::Geometric, vec![("local", local)]);
    if tail {
        let t = euler_tail_bound(hi.max(lo) as f64, s.sigma, lf.degree());
        bound = TailBound::new(
            bound.value + t,
            TailMethod::Integral,
            vec![("local", local), ("prime_tail", t), ("P", hi as f64)],
        );
    }
    Ok((acc.value(), bound))
}

/// `L(s, chi)` for a Dirichlet character via `q^{-s} sum_b chi(b) zeta(s, b/q)`.
pub fn character_l_value(chi: &DirichletCharacter, s: EvalPoint) -> Result<(Complex64, f64)> {
    let q = chi.modulus();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for b in 1..=q {
        let c = chi.value(b);
        if c.norm() == 0.0 {
            continue;
        }
        let (z, e) = hurwitz_zeta(s.s(), b as f64 / q as f64)?;
        total += c * z;
        err += e;
    }
    let scale = (-s.s() * (q as f64).ln()).exp();
    Ok((scale * total, scale.norm() * err * (1.0 + 1e-15) + 1e-16 * total.norm()))
}

/// Best available value of `L(s)` for `sigma > 1`: Euler-Maclaurin for characters, the
/// Euler product over the whole table otherwise. The bound is on `|value - L(s)|`.
pub fn l_value(lf: &LFunction, s: EvalPoint, shifts: &Shifts) -> Result<(Complex64, f64)> {
    if let (Some(chi), true) = (lf.character_data(), shifts.overrides.is_empty()) {
        return character_l_value(&chi, s.shifted(shifts.default));
    }
    let (log, tb) = euler_log_product(lf, s, 1, lf.table.len() as u64, shifts, true)?;
    let v = log.exp();
    Ok((v, v.norm() * tb.value.exp_m1()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::LFunction;

    #[test]
    fn zeta_two_partial_sum() {
        let z = LFunction::character(1, 0, 1000).unwrap();
        let (v, tb) = dirichlet_sum(&z, EvalPoint::new(2.0, 0.0), 100).unwrap();
        assert!((v.re - 1.6349839001848923).abs() < 1e-13);
        let true_tail = std::f64::consts::PI.powi(2) / 6.0 - v.re;
        assert!((true_tail - 0.00995).abs() < 1e-4);
        assert!(tb.value >= true_tail);
    }

    #[test]
    fn single_term_is_one() {
        let f = LFunction::newform(12, 10).unwrap();
        let (v, _) = dirichlet_sum(&f, EvalPoint::new(1.5, 3.0), 1).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn truncation_difference_within_tail() {
        let chi = LFunction::character(4, 1, 1_000_000).unwrap();
        let s = EvalPoint::new(1.1, 0.0);
        let (big, _) = dirichlet_sum(&chi, s, 1_000_000).unwrap();
        let (small, tb) = dirichlet_sum(&chi, s, 100_000).unwrap();
        assert_eq!(tb.method, TailMethod::Abel);
        assert!((big - small).norm() < tb.value);
    }

    #[test]
    fn rejects_sigma_at_one() {
        let z = LFunction::character(1, 0, 10).unwrap();
        assert!(matches!(dirichlet_sum(&z, EvalPoint::new(1.0, 0.0), 5), Err(Error::Domain(_))));
    }

    #[test]
    fn local_log_examples() {
        let empty = EulerFactor { p: 2, roots: vec![] };
        let (v, tb) = local_log(&empty, EvalPoint::new(2.0, 0.0), 30).unwrap();
        assert_eq!((v, tb.value), (Complex64::new(0.0, 0.0), 0.0));

        let one = EulerFactor { p: 2, roots: vec![Complex64::new(1.0, 0.0)] };
        let (v, _) = local_log(&one, EvalPoint::new(2.0, 0.0), 30).unwrap();
        assert!((v.re - (-(0.75f64).ln())).abs() < 1e-12);
        assert!((v.re - 0.287682072451781).abs() < 1e-12);

        let th = 1.1f64;
        let pair = EulerFactor { p: 3, roots: vec![Complex64::from_polar(1.0, th), Complex64::from_polar(1.0, -th)] };
        let (v, _) = local_log(&pair, EvalPoint::new(1.0, 0.0), 40).unwrap();
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn log_zeta_two() {
        let z = LFunction::character(1, 0, 10).unwrap();
        let (v, tb) = euler_log_product(&z, EvalPoint::new(2.0, 0.0), 1, 10_000, &Shifts::none(), true).unwrap();
        let exact = (std::f64::consts::PI.powi(2) / 6.0).ln();
        assert!((v.re - exact).abs() <= tb.value);
        assert!(tb.value < 1e-4);
    }

    #[test]
    fn empty_range_is_zero() {
        let f = LFunction::newform(12, 100).unwrap();
        let (v, tb) = euler_log_product(&f, EvalPoint::new(1.5, 0.0), 50, 50, &Shifts::none(), false).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        assert_eq!(tb.value, 0.0);
    }

    #[test]
    fn constant_shift_identity() {
        let f = LFunction::newform(12, 5000).unwrap();
        let s = EvalPoint::new(1.3, 2.0);
        let tau = 0.7;
        let (a, _) = euler_log_product(&f, s, 1, 5000, &Shifts::constant(tau), false).unwrap();
        let (b, _) = euler_log_product(&f, s.shifted(tau), 1, 5000, &Shifts::none(), false).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn character_values_agree_with_series() {
        let chi = LFunction::character(5, 1, 1_000_000).unwrap();
        let s = EvalPoint::new(1.5, 7.0);
        let (a, e) = character_l_value(&chi.character_data().unwrap(), s).unwrap();
        let (b, tb) = dirichlet_sum(&chi, s, 1_000_000).unwrap();
        assert!(e < 1e-12);
        assert!((a - b).norm() <= tb.value + e);
        let (c, tb2) = euler_log_product(&chi, s, 1, 1_000_000, &Shifts::none(), true).unwrap();
        assert!((c.exp() - a).norm() <= a.norm() * tb2.value.exp_m1() + e);
    }
}
