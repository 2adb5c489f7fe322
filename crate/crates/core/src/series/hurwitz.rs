//! Hurwitz zeta by Euler-Maclaurin summation with an explicit remainder bound.
//!
//! `zeta(s, a) = sum_{k<N} (a+k)^{-s} + (a+N)^{1-s}/(s-1) + (a+N)^{-s}/2
//!   + sum_{j=1}^{J} B_{2j}/(2j)! (s)_{2j-1} (a+N)^{-s-2j+1} + R`, with
//! `|R| <= 4 |(s)_{2J}| / (2 pi)^{2J} * (a+N)^{-sigma-2J+1} / (sigma+2J-1)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TERMS: usize = 24;

/// `B_{2j} / (2j)!` for `j = 1..=TERMS`.
fn bernoulli_ratios() -> &'static [f64; TERMS] {
    static TABLE: std::sync::OnceLock<[f64; TERMS]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let exact = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
        let mut out = [0.0; TERMS];
        let mut fact = 1.0f64;
        for j in 1..=TERMS {
            fact *= (2 * j - 1) as f64 * (2 * j) as f64;
            out[j - 1] = if j <= exact.len() {
                exact[j - 1] / fact
            } else {
                // B_{2j}/(2j)! = (-1)^{j+1} 2 zeta(2j) / (2 pi)^{2j}
                let e = 2 * j as i32;
                let zeta: f64 = (1..=60).map(|n| (n as f64).powi(-e)).sum::<f64>() + 60f64.powi(1 - e) / (e - 1) as f64;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta / (2.0 * PI).powi(e)
            };
        }
        out
    })
}

/// `(zeta(s, a), error bound)` for `0 < a <= 1`, `Re(s) > 0`, `s != 1`.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<(Complex64, f64)> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hurwitz parameter {a} outside (0, 1]")));
    }
    if s.re <= 0.0 || (s - 1.0).norm() < 1e-12 {
        return Err(Error::Domain(format!("Hurwitz zeta at s = {s}")));
    }
    let sigma = s.re;
    let two_j = 2 * TERMS;
    let mut poch_full = Complex64::new(1.0, 0.0);
    for i in 0..two_j {
        poch_full *= s + i as f64;
    }
    let remainder = |n: f64| -> f64 {
        4.0 * poch_full.norm() / (2.0 * PI).powi(two_j as i32) * (a + n).powf(-sigma - two_j as f64 + 1.0)
            / (sigma + two_j as f64 - 1.0)
    };
    let mut n = 10usize.max((s.im.abs() / 2.0) as usize);
    while remainder(n as f64) > 1e-16 {
        n = n * 3 / 2 + 1;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k in 0..n {
        let term = (-s * (a + k as f64).ln()).exp();
        abs_sum += term.norm();
        sum += term;
    }
    let x = a + n as f64;
    let lx = x.ln();
    let x_s = (-s * lx).exp();
    let mut tail = x * x_s / (s - 1.0) + x_s / 2.0;
    let mut poch = s;
    let mut power = x_s / x;
    for (j, &c) in bernoulli_ratios().iter().enumerate() {
        tail += c * poch * power;
        let k = 2.0 * (j + 1) as f64;
        poch *= (s + (k - 1.0)) * (s + k);
        power /= x * x;
    }
    let value = sum + tail;
    let rounding = 4.0 * f64::EPSILON * (abs_sum + tail.norm()) * (1.0 + n as f64).log2();
    Ok((value, remainder(n as f64) + rounding))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two() {
        let (v, e) = hurwitz_zeta(Complex64::new(2.0, 0.0), 1.0).unwrap();
        assert!((v.re - PI * PI / 6.0).abs() < 1e-14 && v.im.abs() < 1e-15);
        assert!(e < 1e-13);
    }

    #[test]
    fn half_parameter_identity() {
        // zeta(s, 1/2) = (2^s - 1) zeta(s)
        for &(sigma, t) in &[(1.01, 0.0), (1.3, 17.0), (2.5, -150.0), (1.001, 199.0)] {
            let s = Complex64::new(sigma, t);
            let (h, e1) = hurwitz_zeta(s, 0.5).unwrap();
            let (z, e2) = hurwitz_zeta(s, 1.0).unwrap();
            let rhs = ((s * 2f64.ln()).exp() - 1.0) * z;
            assert!((h - rhs).norm() < 1e-11 + e1 + e2, "s={s}");
        }
    }

    #[test]
    fn matches_direct_sum_at_large_sigma() {
        let s = Complex64::new(6.0, 3.0);
        let a = 0.2;
        let direct: Complex64 = (0..200_000).map(|k| (-s * (a + k as f64).ln()).exp()).sum();
        let (v, _) = hurwitz_zeta(s, a).unwrap();
        assert!((v - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(hurwitz_zeta(Complex64::new(1.0, 0.0), 0.5).is_err());
        assert!(hurwitz_zeta(Complex64::new(2.0, 0.0), 0.0).is_err());
    }
}
