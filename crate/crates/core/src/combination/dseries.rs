use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::series::EvalPoint;

/// `sum a_m m^{-s}` with finitely many nonzero `a_m`, stored ascending in `m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteDirichletSeries {
    terms: Vec<(u64, Complex64)>,
}

impl FiniteDirichletSeries {
    /// Builds from arbitrary `(m, a_m)` pairs, merging repeated `m` and dropping zeros.
    pub fn new(pairs: impl IntoIterator<Item = (u64, Complex64)>) -> Self {
        let mut map: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (m, a) in pairs {
            assert!(m >= 1, "Dirichlet series indices start at 1");
            *map.entry(m).or_default() += a;
        }
        FiniteDirichletSeries { terms: map.into_iter().filter(|(_, a)| *a != Complex64::new(0.0, 0.0)).collect() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new([(1, c)])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn terms(&self) -> &[(u64, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest index with a nonzero coefficient (0 when empty).
    pub fn max_index(&self) -> u64 {
        self.terms.last().map_or(0, |t| t.0)
    }

    pub fn coeff(&self, m: u64) -> Complex64 {
        self.terms
            .binary_search_by_key(&m, |t| t.0)
            .map_or(Complex64::new(0.0, 0.0), |i| self.terms[i].1)
    }

    pub fn eval(&self, s: EvalPoint) -> Complex64 {
        let st = s.s();
        self.terms
            .iter()
            .map(|&(m, a)| if m == 1 { a } else { a * (-st * (m as f64).ln()).exp() })
            .sum()
    }

    /// `sum |a_m| m^{-sigma}`.
    pub fn abs_weight(&self, sigma: f64) -> f64 {
        self.terms.iter().map(|&(m, a)| a.norm() * (m as f64).powf(-sigma)).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.terms.iter().map(|&(m, a)| (m, a * c)))
    }

    /// Dirichlet convolution truncated to indices `<= limit`.
    pub fn mul_truncated(&self, other: &Self, limit: u64) -> Self {
        let mut pairs = Vec::new();
        for &(m, a) in &self.terms {
            for &(k, b) in &other.terms {
                match m.checked_mul(k) {
                    Some(mk) if mk <= limit => pairs.push((mk, a * b)),
                    _ => {}
                }
            }
        }
        Self::new(pairs)
    }
}

impl Add for &FiniteDirichletSeries {
    type Output = FiniteDirichletSeries;
    fn add(self, rhs: Self) -> FiniteDirichletSeries {
        FiniteDirichletSeries::new(self.terms.iter().chain(&rhs.terms).copied())
    }
}

impl Neg for &FiniteDirichletSeries {
    type Output = FiniteDirichletSeries;
    fn neg(self) -> FiniteDirichletSeries {
        FiniteDirichletSeries::new(self.terms.iter().map(|&(m, a)| (m, -a)))
    }
}

impl Sub for &FiniteDirichletSeries {
    type Output = FiniteDirichletSeries;
    fn sub(self, rhs: Self) -> FiniteDirichletSeries {
        self + &(-rhs)
    }
}

impl Mul for &FiniteDirichletSeries {
    type Output = FiniteDirichletSeries;
    fn mul(self, rhs: Self) -> FiniteDirichletSeries {
        self.mul_truncated(rhs, u64::MAX)
    }
}
