use num_complex::Complex64;

use super::certify::{winding_certify, CertifyParams, Certification, ZeroCertificate};
use super::scan::{locate_zero, scan_minima};
use super::{PlainCombination, Target};
use crate::combination::{monomial_test, CombinationPolynomial, FiniteDirichletSeries, MonomialTest};
use crate::error::{Error, Result};
use crate::lfunc::LFunction;

/// `[sigma1, sigma2] x [t1, t2]` with `sigma1 > 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub sigma1: f64,
    pub sigma2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl Rectangle {
    pub fn new(sigma1: f64, sigma2: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(sigma1 > 1.0 && sigma1 < sigma2 && t1 < t2) {
            return Err(Error::Domain(format!("rectangle [{sigma1}, {sigma2}] x [{t1}, {t2}] needs 1 < sigma1 < sigma2, t1 < t2")));
        }
        Ok(Rectangle { sigma1, sigma2, t1, t2 })
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.sigma1 && s.re <= self.sigma2 && s.im >= self.t1 && s.im <= self.t2
    }
}

#[derive(Clone, Debug)]
pub struct DensityParams {
    /// Vertical scan lines spread over `[sigma1, sigma2]`.
    pub lines: usize,
    pub step: f64,
    /// Candidates are minima of `|F|` below this.
    pub threshold: f64,
    /// Certification radii, tried in order.
    pub radii: Vec<f64>,
    pub certify: CertifyParams,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams { lines: 6, step: 0.02, threshold: 0.1, radii: vec![0.01, 0.003, 0.001], certify: CertifyParams::default() }
    }
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    pub rect: Rectangle,
    pub t_max: f64,
    pub certificates: Vec<ZeroCertificate>,
    /// Located zeros that no radius certified.
    pub refused: Vec<(Complex64, Certification)>,
    pub candidates: usize,
    /// Rows `(T', N(T'))` for `T' = T/2, T`.
    pub counts: Vec<(f64, usize)>,
    /// Certified zeros below and above the real axis.
    pub lower: usize,
    pub upper: usize,
    /// Why the search was skipped, if it was.
    pub skipped: Option<String>,
}

impl DensityReport {
    pub const CSV_HEADER: &'static str = "T,count";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (t, n) in &self.counts {
            out.push_str(&format!("{t},{n}\n"));
        }
        out
    }

    pub fn zeros_csv(&self) -> String {
        let mut out = format!("{}\n", ZeroCertificate::CSV_HEADER);
        for c in &self.certificates {
            out.push_str(&c.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn count(&self, t: f64) -> usize {
        self.certificates.iter().filter(|c| c.center.im.abs() <= t).map(|c| c.winding as usize).sum()
    }

    /// Largest real part among certified zeros.
    pub fn max_sigma(&self) -> Option<f64> {
        self.certificates.iter().map(|c| c.center.re).reduce(f64::max)
    }
}

/// `|a_1| > sum_{m>1} |a_m| m^{-sigma}`: the series cannot vanish on `Re(s) >= sigma`.
fn dominant_first_term(d: &FiniteDirichletSeries, sigma: f64) -> bool {
    let rest: f64 = d.terms().iter().filter(|(m, _)| *m > 1).map(|(m, a)| a.norm() * (*m as f64).powf(-sigma)).sum();
    d.coeff(1).norm() > rest
}

/// Certifies `zero` with the first radius that keeps the disk clear of the evaluation
/// floor and of other known zeros.
pub fn certify_zero<T: Target + ?Sized>(
    target: &T,
    zero: Complex64,
    radii: &[f64],
    known: &[Complex64],
    params: CertifyParams,
) -> Result<Certification> {
    let gap = known.iter().map(|k| (k - zero).norm()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let room = zero.re - target.sigma_floor();
    let mut last = Certification::Inconclusive { gamma: 0.0, errbound: 0.0, reason: "no admissible radius".into() };
    for &r in radii {
        let r = r.min(0.5 * gap).min(0.9 * room);
        if !(r > 0.0) {
            continue;
        }
        last = winding_certify(target, zero, r, params)?;
        if matches!(last, Certification::Certified(_)) {
            break;
        }
    }
    Ok(last)
}

/// Certified zeros in `[sigma1, sigma2] x [-T, T]` by line scans, Newton location and
/// winding certificates, with counts at `T/2` and `T`.
pub fn density_scan<T: Target + ?Sized>(target: &T, sigma1: f64, sigma2: f64, t_max: f64, params: &DensityParams) -> Result<DensityReport> {
    let rect = Rectangle::new(sigma1, sigma2, -t_max, t_max)?;
    let lines = params.lines.max(1);
    let mut zeros: Vec<Complex64> = Vec::new();
    let mut candidates = 0;
    for l in 0..lines {
        let sigma = sigma1 + (l as f64 + 0.5) * (sigma2 - sigma1) / lines as f64;
        for c in scan_minima(target, sigma, -t_max, t_max, params.step, params.threshold)? {
            candidates += 1;
            if let Some(z) = locate_zero(target, Complex64::new(c.sigma, c.t))? {
                if rect.contains(z) && !zeros.iter().any(|k| (k - z).norm() < 1e-7) {
                    zeros.push(z);
                }
            }
        }
    }
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im));
    let mut certificates = Vec::new();
    let mut refused = Vec::new();
    for &z in &zeros {
        match certify_zero(target, z, &params.radii, &zeros, params.certify)? {
            Certification::Certified(c) => certificates.push(c),
            other => refused.push((z, other)),
        }
    }
    let mut report = DensityReport {
        rect,
        t_max,
        certificates,
        refused,
        candidates,
        counts: Vec::new(),
        lower: 0,
        upper: 0,
        skipped: None,
    };
    report.lower = report.certificates.iter().filter(|c| c.center.im < 0.0).count();
    report.upper = report.certificates.iter().filter(|c| c.center.im > 0.0).count();
    report.counts = vec![(0.5 * t_max, report.count(0.5 * t_max)), (t_max, report.count(t_max))];
    Ok(report)
}

/// `density_scan` for `P(L(s, pi_1), ...)`. Monomials are skipped: the L-values do not
/// vanish in `Re(s) > 1`, so any zero there is a zero of the coefficient alone.
pub fn density_for_polynomial(
    p: &CombinationPolynomial,
    lfs: &[LFunction],
    sigma1: f64,
    sigma2: f64,
    t_max: f64,
    params: &DensityParams,
) -> Result<DensityReport> {
    if let MonomialTest::Monomial { coeff, .. } = monomial_test(p)? {
        let rect = Rectangle::new(sigma1, sigma2, -t_max, t_max)?;
        let reason = if dominant_first_term(&coeff, sigma1) {
            "monomial; coefficient has no zeros in the rectangle"
        } else {
            "monomial; zeros can only come from the coefficient"
        };
        return Ok(DensityReport {
            rect,
            t_max,
            certificates: Vec::new(),
            refused: Vec::new(),
            candidates: 0,
            counts: vec![(0.5 * t_max, 0), (t_max, 0)],
            lower: 0,
            upper: 0,
            skipped: Some(reason.into()),
        });
    }
    let target = PlainCombination { p: p.clone(), lfs: lfs.to_vec() };
    density_scan(&target, sigma1, sigma2, t_max, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::FnTarget;

    #[test]
    fn synthetic_conjugate_zeros() {
        let z0 = Complex64::new(1.05, 3.0);
        let z1 = Complex64::new(1.02, 7.5);
        let f = move |s: Complex64| (s - z0) * (s - z0.conj()) * (s - z1) * (s - z1.conj()) / (s * s * s * s);
        let t = FnTarget { f, floor: 1.0 };
        let params = DensityParams { threshold: 0.02, step: 0.05, ..DensityParams::default() };
        let r = density_scan(&t, 1.01, 1.1, 10.0, &params).unwrap();
        assert_eq!(r.count(10.0), 4);
        assert_eq!(r.count(5.0), 2);
        assert_eq!(r.lower, r.upper);
        assert_eq!(r.to_csv(), "T,count\n5,2\n10,4\n");
    }

    #[test]
    fn constant_monomial_is_skipped() {
        let z = LFunction::character(1, 0, 10).unwrap();
        let p = CombinationPolynomial::from_terms(1, [(vec![2], FiniteDirichletSeries::constant(Complex64::new(3.0, 0.0)))]).unwrap();
        let r = density_for_polynomial(&p, &[z], 1.01, 1.1, 50.0, &DensityParams::default()).unwrap();
        assert!(r.skipped.is_some());
        assert_eq!(r.count(50.0), 0);
    }

    #[test]
    fn monomial_coefficient_reasons() {
        let lfs = [LFunction::character(1, 0, 10).unwrap(), LFunction::character(5, 1, 10).unwrap()];
        let c = |re: f64| Complex64::new(re, 0.0);
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 2], FiniteDirichletSeries::new([(1, c(2.0)), (2, c(-1.0))]))]).unwrap();
        let r = density_for_polynomial(&p, &lfs, 1.01, 1.1, 50.0, &DensityParams::default()).unwrap();
        assert_eq!(r.skipped.as_deref(), Some("monomial; coefficient has no zeros in the rectangle"));
        // 1 - 4 * 2^{-s} vanishes on Re(s) = 2
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 0], FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-4.0))]))]).unwrap();
        let r = density_for_polynomial(&p, &lfs, 1.01, 1.1, 50.0, &DensityParams::default()).unwrap();
        assert_eq!(r.skipped.as_deref(), Some("monomial; zeros can only come from the coefficient"));
    }
}
