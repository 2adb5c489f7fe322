//! Zeros of polynomial combinations of L-functions in `Re(s) > 1`: line scans,
//! winding-number certificates, simultaneous approximation of prime phases and
//! zero counts.

mod approx;
mod certify;
mod density;
mod scan;

pub use approx::*;
pub use certify::*;
pub use density::*;
pub use scan::*;

use num_complex::Complex64;

use crate::combination::{CombinationPolynomial, SpecializedPolynomial};
use crate::error::Result;
use crate::lfunc::{character_table, hurwitz_decomposition, LFunction, LKind};
use crate::series::{l_value, EvalPoint, Shifts};

/// A function evaluable with an error bound.
pub trait Target: Sync {
    /// Value at `s` and a bound on its distance to the true value.
    fn eval(&self, s: Complex64) -> Result<(Complex64, f64)>;

    /// Evaluation requires `Re(s)` strictly above this.
    fn sigma_floor(&self) -> f64 {
        1.0
    }

    /// Common shift `t` recorded in certificates.
    fn shift(&self) -> f64 {
        0.0
    }

    /// `F(conj s) = conj F(s)`.
    fn is_real(&self) -> bool {
        false
    }
}

/// `sum_d c_d(s) prod_j x_j^{d_j}` at inexact `x_j` (value, error), with a bound that
/// covers the input errors and rounding.
pub fn eval_with_error(h: &SpecializedPolynomial, xs: &[(Complex64, f64)]) -> (Complex64, f64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut magnitude = 0.0;
    for (d, c) in &h.terms {
        let mut term = *c;
        let mut exact = c.norm();
        let mut upper = c.norm();
        for (j, &e) in d.iter().enumerate() {
            let (x, dx) = xs[j];
            term *= x.powu(e);
            exact *= x.norm().powi(e as i32);
            upper *= (x.norm() + dx).powi(e as i32);
        }
        value += term;
        err += upper - exact;
        magnitude += upper;
    }
    let ops = (h.total_degree() + 2) as f64 * h.terms.len().max(1) as f64;
    (value, err + 4.0 * f64::EPSILON * ops * magnitude)
}

/// `P(L(s, pi_1), ..., L(s, pi_n))`.
#[derive(Clone, Debug)]
pub struct PlainCombination {
    pub p: CombinationPolynomial,
    pub lfs: Vec<LFunction>,
}

impl Target for PlainCombination {
    fn eval(&self, s: Complex64) -> Result<(Complex64, f64)> {
        let pt = EvalPoint::from(s);
        let xs = self.lfs.iter().map(|lf| l_value(lf, pt, &Shifts::none())).collect::<Result<Vec<_>>>()?;
        Ok(eval_with_error(&self.p.at(pt), &xs))
    }

    fn is_real(&self) -> bool {
        is_real_combination(&self.p, &self.lfs)
    }
}

/// For each L-function, the index of its complex conjugate within the family.
fn conjugate_indices(lfs: &[LFunction]) -> Option<Vec<usize>> {
    let probe = |lf: &LFunction| lf.table.dense_prefix(lf.table.period().unwrap_or(64).min(lf.table.len().max(1)).max(1));
    let values: Vec<Vec<Complex64>> = lfs.iter().map(probe).collect();
    (0..lfs.len())
        .map(|j| {
            (0..lfs.len()).find(|&k| {
                lfs[k].spec.degree == lfs[j].spec.degree
                    && lfs[k].spec.conductor == lfs[j].spec.conductor
                    && values[k].len() == values[j].len()
                    && values[k].iter().zip(&values[j]).all(|(a, b)| (a - b.conj()).norm() < 1e-12)
            })
        })
        .collect()
}

/// `P(L)(conj s) = conj P(L)(s)`: conjugation permutes the family and maps each
/// coefficient to the conjugate of the permuted term's coefficient.
pub fn is_real_combination(p: &CombinationPolynomial, lfs: &[LFunction]) -> bool {
    let Some(perm) = conjugate_indices(lfs) else { return false };
    p.terms().all(|(d, c)| {
        let mut image = vec![0; d.0.len()];
        for (j, &e) in d.0.iter().enumerate() {
            image[perm[j]] += e;
        }
        let partner = p.terms().find(|(e, _)| e.0 == image).map(|(_, c)| c);
        partner.is_some_and(|other| {
            c.terms().len() == other.terms().len()
                && c.terms().iter().zip(other.terms()).all(|((m, a), (k, b))| m == k && (a - b.conj()).norm() < 1e-12)
        })
    })
}

/// `F(s) = P_{i t0}(prod_p L_p(s + i t_p, pi_1), ...)`, where `P_{i t0}` has coefficients
/// `D(s + i t0)`.
#[derive(Clone, Debug)]
pub struct ShiftedCombination {
    pub p: CombinationPolynomial,
    pub lfs: Vec<LFunction>,
    pub t0: f64,
    pub shifts: Shifts,
}

impl ShiftedCombination {
    pub fn new(p: CombinationPolynomial, lfs: Vec<LFunction>, t0: f64, shifts: Shifts) -> Self {
        ShiftedCombination { p, lfs, t0, shifts }
    }
}

impl Target for ShiftedCombination {
    fn eval(&self, s: Complex64) -> Result<(Complex64, f64)> {
        let pt = EvalPoint::from(s);
        let xs = self.lfs.iter().map(|lf| l_value(lf, pt, &self.shifts)).collect::<Result<Vec<_>>>()?;
        Ok(eval_with_error(&self.p.at(pt.shifted(self.t0)), &xs))
    }

    fn shift(&self) -> f64 {
        self.t0
    }
}

/// `F` for a combination, `t0` and solved shifts: `t_p = t0` for `p <= y`, the solved
/// value where given, `0` elsewhere.
pub fn build_f(
    p: CombinationPolynomial,
    lfs: Vec<LFunction>,
    t0: f64,
    solved: &std::collections::BTreeMap<u64, f64>,
    y: u64,
) -> ShiftedCombination {
    let mut shifts = Shifts::none();
    for q in crate::primes::primes_up_to(y) {
        shifts.overrides.insert(q, t0);
    }
    shifts.overrides.extend(solved.iter().filter(|(&q, _)| q > y).map(|(&q, &t)| (q, t)));
    ShiftedCombination::new(p, lfs, t0, shifts)
}

/// A closure target.
pub struct FnTarget<F> {
    pub f: F,
    pub floor: f64,
}

impl<F: Fn(Complex64) -> Complex64 + Sync> Target for FnTarget<F> {
    fn eval(&self, s: Complex64) -> Result<(Complex64, f64)> {
        let v = (self.f)(s);
        Ok((v, 4.0 * f64::EPSILON * (1.0 + v.norm())))
    }

    fn sigma_floor(&self) -> f64 {
        self.floor
    }
}

/// `sum_{n = a mod q} n^{-s} = q^{-s} zeta(s, a/q)` as a linear form in the L-functions of
/// the characters modulo `q`.
pub fn hurwitz_combination(a: u64, q: u64, len: usize) -> Result<PlainCombination> {
    let parts = hurwitz_decomposition(a, q)?;
    let n = parts.len();
    let mut p = CombinationPolynomial::new(n);
    let mut lfs = Vec::with_capacity(n);
    for (j, (c, spec)) in parts.into_iter().enumerate() {
        let mut e = vec![0; n];
        e[j] = 1;
        p.add_term(e, crate::combination::FiniteDirichletSeries::constant(c))?;
        let LKind::DirichletCharacter { modulus, index } = spec.kind else { unreachable!("characters only") };
        lfs.push(LFunction { table: character_table(modulus, index, len)?, spec });
    }
    Ok(PlainCombination { p, lfs })
}
