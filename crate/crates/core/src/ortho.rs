//! Prime sums of products of Hecke eigenvalues: the twisted correlation sums
//! `E(x)` and the second moment of `u . lambda(p)` over a residue class.

use num_complex::Complex64;

use crate::arith::{euler_phi, gcd};
use crate::error::{Error, Result};
use crate::lfunc::{DirichletCharacter, LFunction};
use crate::primes::{par_sum_over_primes, prime_tail_bound, threads};

/// Default prime truncation for progression sums.
pub const DEFAULT_PMAX: u64 = 10_000_000;

fn check_covers(lf: &LFunction, x: u64) -> Result<()> {
    if x as usize > lf.table.len() && !lf.table.is_periodic() {
        return Err(Error::Precondition(format!("{} covers primes up to {}, need {x}", lf.spec.label, lf.table.len())));
    }
    Ok(())
}

/// `E(x) = sum_{p<=x} (lambda_j(p) conj(lambda_k(p)) chi(p) - delta) log^2 p / p`, where
/// `delta = 1` exactly when `j = k` and `chi` is principal.
pub fn e_sum(lj: &LFunction, lk: &LFunction, chi: &DirichletCharacter, x: u64) -> Result<Complex64> {
    check_covers(lj, x)?;
    check_covers(lk, x)?;
    let delta = if lj.spec == lk.spec && chi.is_principal() { 1.0 } else { 0.0 };
    Ok(par_sum_over_primes(0, x, threads(), |p| {
        let v = lj.table.prime_value(p) * lk.table.prime_value(p).conj() * chi.value(p) - delta;
        let l = (p as f64).ln();
        v * (l * l / p as f64)
    }))
}

/// `(sum_{p<=x} lambda_j(p) conj(lambda_k(p)) / p, sum_{p<=x} |lambda_j(p)|^2 / p)`.
pub fn cross_and_diagonal(lj: &LFunction, lk: &LFunction, x: u64) -> Result<(Complex64, f64)> {
    check_covers(lj, x)?;
    check_covers(lk, x)?;
    let pair = par_sum_over_primes(0, x, threads(), |p| {
        let a = lj.table.prime_value(p);
        let b = lk.table.prime_value(p);
        let w = 1.0 / p as f64;
        // pack the real diagonal into a second complex slot
        Pair(a * b.conj() * w, Complex64::new(a.norm_sqr() * w, 0.0))
    });
    Ok((pair.0, pair.1.re))
}

#[derive(Default)]
struct Pair(Complex64, Complex64);

impl std::ops::Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

/// `s(y, sigma) = sum_{p > y} p^{-sigma}` truncated at `pmax`, with a bound on the rest.
pub fn s_tail(y: u64, sigma: f64, pmax: u64) -> Result<(f64, f64)> {
    if sigma <= 1.0 {
        return Err(Error::Domain(format!("s_tail needs sigma > 1, got {sigma}")));
    }
    let value = if y >= pmax { 0.0 } else { par_sum_over_primes(y, pmax, threads(), |p| (p as f64).powf(-sigma)) };
    Ok((value, prime_tail_bound(y.max(pmax) as f64, sigma)))
}

#[derive(Clone, Debug)]
pub struct ProgressionQuery {
    pub a: u64,
    pub q: u64,
    pub y: u64,
    pub sigma: f64,
    pub u: Vec<Complex64>,
}

impl ProgressionQuery {
    pub fn validate(&self, lfs: &[LFunction]) -> Result<()> {
        if self.q == 0 || gcd(self.a, self.q) != 1 {
            return Err(Error::NotCoprime { a: self.a, q: self.q });
        }
        for lf in lfs {
            if gcd(self.q, lf.spec.conductor) != 1 {
                return Err(Error::NotCoprime { a: lf.spec.conductor, q: self.q });
            }
        }
        if !(self.sigma > 1.0 && self.sigma <= 2.0) {
            return Err(Error::Domain(format!("sigma = {} outside (1, 2]", self.sigma)));
        }
        if self.u.len() != lfs.len() {
            return Err(Error::InvalidArgument(format!("u has {} entries for {} L-functions", self.u.len(), lfs.len())));
        }
        let norm = self.u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("|u| = {norm}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthoReport {
    pub q: u64,
    pub a: u64,
    pub y: u64,
    pub sigma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pmax: u64,
    pub errbound: f64,
}

impl OrthoReport {
    pub const CSV_HEADER: &'static str = "q,a,y,sigma,lhs,rhs,ratio,pmax,errbound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{:.12},{},{:.6e}",
            self.q, self.a, self.y, self.sigma, self.lhs, self.rhs, self.ratio, self.pmax, self.errbound
        )
    }
}

/// Second moment of `u . lambda(p)` over `p = a mod q`, `y < p <= pmax`, against
/// `s(y, sigma) / phi(q)` (both truncated at `pmax`). The bound covers `p > pmax`
/// through `|u . lambda(p)|^2 <= sum_j r_j^2`.
pub fn sump_ratio(query: &ProgressionQuery, lfs: &[LFunction], pmax: u64) -> Result<OrthoReport> {
    query.validate(lfs)?;
    for lf in lfs {
        check_covers(lf, pmax)?;
    }
    let (a, q, sigma) = (query.a % query.q, query.q, query.sigma);
    let lhs = if query.y >= pmax {
        0.0
    } else {
        par_sum_over_primes(query.y, pmax, threads(), |p| {
            if p % q != a {
                return 0.0;
            }
            let v: Complex64 = query.u.iter().zip(lfs).map(|(u, lf)| u * lf.table.prime_value(p)).sum();
            v.norm_sqr() * (p as f64).powf(-sigma)
        })
    };
    let (s, tail) = s_tail(query.y, sigma, pmax)?;
    let r2: f64 = lfs.iter().map(|lf| (lf.degree() * lf.degree()) as f64).sum();
    let rhs = s / euler_phi(q) as f64;
    Ok(OrthoReport {
        q,
        a,
        y: query.y,
        sigma,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::NAN },
        pmax,
        errbound: r2 * tail,
    })
}
