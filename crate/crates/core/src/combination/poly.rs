use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use super::FiniteDirichletSeries;
use crate::error::{Error, Result};
use crate::lfunc::LFunction;
use crate::series::{euler_log_product, EvalPoint, Shifts};

/// Exponent vector, ordered graded-lexicographically: total degree first, then
/// lexicographic with `x_1` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `P = sum_d D_d(s) x^d` with coefficients in the ring of finite Dirichlet series.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinationPolynomial {
    n: usize,
    terms: BTreeMap<Exponent, FiniteDirichletSeries>,
}

impl CombinationPolynomial {
    pub fn new(n: usize) -> Self {
        CombinationPolynomial { n, terms: BTreeMap::new() }
    }

    /// Adds a term, combining with an existing term of the same exponent.
    pub fn add_term(&mut self, exponent: Vec<u32>, coeff: FiniteDirichletSeries) -> Result<()> {
        if exponent.len() != self.n {
            return Err(Error::InvalidArgument(format!("exponent vector of length {} for n = {}", exponent.len(), self.n)));
        }
        let key = Exponent(exponent);
        let sum = match self.terms.remove(&key) {
            Some(old) => &old + &coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, FiniteDirichletSeries)>) -> Result<Self> {
        let mut p = Self::new(n);
        for (d, c) in terms {
            p.add_term(d, c)?;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &FiniteDirichletSeries)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// True when every coefficient has real `a_m`, so zeros come in conjugate pairs.
    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|d| d.terms().iter().all(|(_, a)| a.im == 0.0))
    }

    /// `h_s`: the coefficients evaluated at `s`.
    pub fn at(&self, s: EvalPoint) -> SpecializedPolynomial {
        SpecializedPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(d, c)| (d.0.clone(), c.eval(s))).collect(),
        }
    }

    /// Parses the text format: one term per line, `[(m,re,im);...] d1 ... dn`.
    /// Blank lines and `#` comments are skipped; `n` is taken from the first term.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_at(text, 1)
    }

    /// As [`parse`](Self::parse), numbering lines from `first_line`.
    pub fn parse_at(text: &str, first_line: usize) -> Result<Self> {
        let mut poly: Option<Self> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = first_line + i;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Parse { line, reason: reason.to_string() };
            let body = body.strip_prefix('[').ok_or_else(|| err("term must start with '['"))?;
            let (coeffs, exps) = body.split_once(']').ok_or_else(|| err("missing ']'"))?;
            let mut pairs = Vec::new();
            for item in coeffs.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let inner = item
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| err("coefficient entries look like (m,re,im)"))?;
                let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(err("coefficient entries look like (m,re,im)"));
                }
                let m: u64 = parts[0].parse().map_err(|_| err("bad index m"))?;
                if m == 0 {
                    return Err(err("index m must be >= 1"));
                }
                let re: f64 = parts[1].parse().map_err(|_| err("bad real part"))?;
                let im: f64 = parts[2].parse().map_err(|_| err("bad imaginary part"))?;
                pairs.push((m, Complex64::new(re, im)));
            }
            let d: Vec<u32> = exps
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| err("bad exponent")))
                .collect::<Result<_>>()?;
            if d.is_empty() {
                return Err(err("missing exponents"));
            }
            let p = poly.get_or_insert_with(|| Self::new(d.len()));
            if d.len() != p.n {
                return Err(err("exponent count differs from earlier terms"));
            }
            p.add_term(d, FiniteDirichletSeries::new(pairs))?;
        }
        poly.ok_or(Error::Parse { line: first_line, reason: "no terms".into() })
    }

    /// Renders the text format; `parse(to_text(P)) == P`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, c) in &self.terms {
            let items: Vec<String> = c.terms().iter().map(|(m, a)| format!("({m},{:?},{:?})", a.re, a.im)).collect();
            let exps: Vec<String> = d.0.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "[{}] {}", items.join(";"), exps.join(" "));
        }
        out
    }
}

/// `h(x) = sum_d c_d x^d` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecializedPolynomial {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

pub(crate) fn monomial_value(d: &[u32], x: &[Complex64]) -> Complex64 {
    d.iter().zip(x).fold(Complex64::new(1.0, 0.0), |acc, (&e, &xi)| acc * xi.powu(e))
}

impl SpecializedPolynomial {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Self {
        SpecializedPolynomial { n, terms }
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(d, c)| c * monomial_value(d, x)).sum()
    }

    /// `sum |c_d| prod |x_j|^{d_j}`, the natural size of `h(x)`.
    pub fn scale_at(&self, x: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(d, c)| c.norm() * d.iter().zip(x).map(|(&e, xi)| xi.norm().powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.n];
        for (d, c) in &self.terms {
            for j in 0..self.n {
                if d[j] == 0 {
                    continue;
                }
                let mut dd = d.clone();
                dd[j] -= 1;
                g[j] += c * d[j] as f64 * monomial_value(&dd, x);
            }
        }
        g
    }

    pub fn nonzero_terms(&self) -> usize {
        self.terms.iter().filter(|(_, c)| c.norm() > 0.0).count()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(d, _)| d.iter().sum::<u32>()).max().unwrap_or(0)
    }
}

/// `L_{<=y}(s) = prod_{p<=y} L_p(s)` (1 for `y < 2`).
pub fn partial_euler_product(lf: &LFunction, s: EvalPoint, y: u64) -> Result<Complex64> {
    if y < 2 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (log, _) = euler_log_product(lf, s, 1, y, &Shifts::none(), false)?;
    Ok(log.exp())
}

/// `h_s` of `Q(x) = P(L_{<=y}(s, pi_1) x_1, ...)`: each coefficient becomes
/// `D(s) prod_j L_{<=y}(s, pi_j)^{d_j}`.
pub fn specialize(p: &CombinationPolynomial, lfs: &[LFunction], s: EvalPoint, y: u64) -> Result<SpecializedPolynomial> {
    if y >= 2 && lfs.len() != p.n() {
        return Err(Error::InvalidArgument(format!("{} L-functions for {} variables", lfs.len(), p.n())));
    }
    if s.sigma < 1.0 {
        return Err(Error::Domain(format!("specialize needs sigma >= 1, got {}", s.sigma)));
    }
    let partial: Vec<Complex64> = if y >= 2 {
        lfs.iter().map(|lf| partial_euler_product(lf, s, y)).collect::<Result<_>>()?
    } else {
        vec![Complex64::new(1.0, 0.0); p.n()]
    };
    Ok(SpecializedPolynomial {
        n: p.n(),
        terms: p.terms().map(|(d, c)| (d.0.clone(), c.eval(s) * monomial_value(&d.0, &partial))).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonomialTest {
    Monomial { coeff: FiniteDirichletSeries, exponent: Vec<u32> },
    /// Two distinct exponent vectors with nonzero coefficients.
    NonMonomial { witness: (Vec<u32>, Vec<u32>) },
}

pub fn monomial_test(p: &CombinationPolynomial) -> Result<MonomialTest> {
    let mut it = p.terms();
    let (d0, c0) = it.next().ok_or(Error::ZeroPolynomial)?;
    Ok(match it.next() {
        None => MonomialTest::Monomial { coeff: c0.clone(), exponent: d0.0.clone() },
        Some((d1, _)) => MonomialTest::NonMonomial { witness: (d0.0.clone(), d1.0.clone()) },
    })
}

#[derive(Clone, Copy, Debug)]
pub struct T0Search {
    pub points: usize,
    pub range: f64,
    /// Threshold per coefficient is `factor * sum |a_m| / m`.
    pub threshold_factor: f64,
}

impl Default for T0Search {
    fn default() -> Self {
        T0Search { points: 1024, range: 4.0 * std::f64::consts::PI / std::f64::consts::LN_2, threshold_factor: 1e-6 }
    }
}

/// A `t0` with every coefficient `|D_i(1 + i t0)|` above its threshold.
pub fn find_t0(p: &CombinationPolynomial, search: T0Search) -> Result<f64> {
    let coeffs: Vec<&FiniteDirichletSeries> = p.terms().map(|(_, c)| c).collect();
    if coeffs.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let thresholds: Vec<f64> = coeffs.iter().map(|c| search.threshold_factor * c.abs_weight(1.0)).collect();
    let score = |t: f64| -> f64 {
        coeffs
            .iter()
            .zip(&thresholds)
            .map(|(c, th)| c.eval(EvalPoint::new(1.0, t)).norm() / th)
            .fold(f64::INFINITY, f64::min)
    };
    if score(0.0) > 1.0 {
        return Ok(0.0);
    }
    let n = search.points.max(2);
    let h = search.range / (n - 1) as f64;
    let (mut best_t, mut best) = (0.0, score(0.0));
    for k in 1..n {
        let t = k as f64 * h;
        let v = score(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // golden-section refinement on the bracketing cell
    let (mut a, mut b) = ((best_t - h).max(0.0), (best_t + h).min(search.range));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if score(c) > score(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    if score(refined) > best {
        best = score(refined);
        best_t = refined;
    }
    if best > 1.0 {
        Ok(best_t)
    } else {
        Err(Error::NoT0 { t: best_t, best: best * thresholds.iter().cloned().fold(0.0, f64::max), threshold: thresholds.iter().cloned().fold(0.0, f64::max) })
    }
}

/// Dirichlet coefficients `a_m`, `m <= limit`, of `s -> P(L(s, pi_1), ..., L(s, pi_n))`.
pub fn combined_series(p: &CombinationPolynomial, lfs: &[LFunction], limit: u64) -> Result<FiniteDirichletSeries> {
    if lfs.len() != p.n() {
        return Err(Error::InvalidArgument(format!("{} L-functions for {} variables", lfs.len(), p.n())));
    }
    let l: Vec<FiniteDirichletSeries> = lfs
        .iter()
        .map(|lf| {
            let vals = lf.table.dense_prefix(limit as usize);
            FiniteDirichletSeries::new(vals.into_iter().enumerate().map(|(i, v)| (i as u64 + 1, v)))
        })
        .collect();
    let mut total = FiniteDirichletSeries::default();
    for (d, c) in p.terms() {
        let mut term = c.mul_truncated(&FiniteDirichletSeries::one(), limit);
        for (j, &e) in d.0.iter().enumerate() {
            for _ in 0..e {
                term = term.mul_truncated(&l[j], limit);
            }
        }
        total = &total + &term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn graded_lex_order() {
        let mut v = vec![Exponent(vec![0, 2]), Exponent(vec![1, 0]), Exponent(vec![1, 1]), Exponent(vec![0, 1]), Exponent(vec![2, 0])];
        v.sort();
        let got: Vec<Vec<u32>> = v.into_iter().map(|e| e.0).collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn text_round_trip() {
        let text = "[(1,2,0);(2,-1,0)] 1 2\n# comment\n[(1,1,0)] 1 0\n";
        let p = CombinationPolynomial::parse(text).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(CombinationPolynomial::parse(&p.to_text()).unwrap(), p);
        let err = CombinationPolynomial::parse("[(1,1,0)] 1\n[(1,x,0)] 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn specialize_examples() {
        let one = FiniteDirichletSeries::one();
        let p = CombinationPolynomial::from_terms(1, [(vec![1], one.clone())]).unwrap();
        let h = specialize(&p, &[], EvalPoint::new(1.3, 2.0), 0).unwrap();
        assert_eq!(h.terms, vec![(vec![1], c(1.0))]);

        let d = FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-1.0))]);
        let p = CombinationPolynomial::from_terms(1, [(vec![1], d)]).unwrap();
        let h = specialize(&p, &[], EvalPoint::new(1.0, 0.0), 0).unwrap();
        assert!((h.terms[0].1 - c(0.5)).norm() < 1e-15);

        let z = LFunction::character(1, 0, 100).unwrap();
        let p = CombinationPolynomial::from_terms(1, [(vec![1], one)]).unwrap();
        let h = specialize(&p, &[z], EvalPoint::new(2.0, 0.0), 2).unwrap();
        assert!((h.terms[0].1 - c(4.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn monomial_examples() {
        let d = FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-1.0))]);
        let one = FiniteDirichletSeries::one();
        let p = CombinationPolynomial::from_terms(1, [(vec![3], d.clone())]).unwrap();
        assert_eq!(monomial_test(&p).unwrap(), MonomialTest::Monomial { coeff: d, exponent: vec![3] });
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 0], one.clone()), (vec![0, 1], one.clone())]).unwrap();
        assert!(matches!(monomial_test(&p).unwrap(), MonomialTest::NonMonomial { .. }));
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 1], one.clone()), (vec![1, 0], one.clone())]).unwrap();
        assert_eq!(monomial_test(&p).unwrap(), MonomialTest::NonMonomial { witness: (vec![1, 0], vec![1, 1]) });
        let cancel = CombinationPolynomial::from_terms(1, [(vec![1], one.clone()), (vec![1], -&one)]).unwrap();
        assert!(matches!(monomial_test(&cancel), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn t0_examples() {
        let one = FiniteDirichletSeries::one();
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 0], one.clone()), (vec![0, 1], one)]).unwrap();
        assert_eq!(find_t0(&p, T0Search::default()).unwrap(), 0.0);

        let d = FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-1.0))]);
        let p = CombinationPolynomial::from_terms(1, [(vec![1], d)]).unwrap();
        assert_eq!(find_t0(&p, T0Search::default()).unwrap(), 0.0);

        let d = FiniteDirichletSeries::new([(1, c(1.0)), (2, c(-2.0))]);
        let p = CombinationPolynomial::from_terms(1, [(vec![1], d.clone())]).unwrap();
        let t0 = find_t0(&p, T0Search::default()).unwrap();
        let v = d.eval(EvalPoint::new(1.0, t0)).norm();
        assert!(v > 1e-6 * 2.0);
        let period = 2.0 * std::f64::consts::PI / std::f64::consts::LN_2;
        let phase = (t0 / period).fract();
        assert!((phase - 0.5).abs() < 1e-6, "t0 = {t0}");
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn combined_series_matches_evaluation() {
        // P = x1 x2 - (1 + 2^{-s}) x1 with zeta and chi_4
        let z = LFunction::character(1, 0, 1000).unwrap();
        let chi = LFunction::character(4, 1, 1000).unwrap();
        let d = FiniteDirichletSeries::new([(1, c(-1.0)), (2, c(-1.0))]);
        let p = CombinationPolynomial::from_terms(2, [(vec![1, 1], FiniteDirichletSeries::one()), (vec![1, 0], d)]).unwrap();
        let a = combined_series(&p, &[z.clone(), chi.clone()], 50).unwrap();
        // a_1 and a_2 from evaluations at large sigma
        let eval = |sigma: f64| {
            let s = EvalPoint::new(sigma, 0.0);
            let h = p.at(s);
            let (x1, _) = crate::series::l_value(&z, s, &Shifts::none()).unwrap();
            let (x2, _) = crate::series::l_value(&chi, s, &Shifts::none()).unwrap();
            h.eval(&[x1, x2])
        };
        let f40 = eval(40.0);
        assert!((f40 - a.coeff(1)).norm() < 1e-11);
        let a2 = (eval(30.0) - a.coeff(1)) * 2f64.powi(30);
        assert!((a2 - a.coeff(2)).norm() < 1e-3);
        // whole-series agreement at sigma = 8 (tail beyond 50 is below 50^{-7} * 50)
        let s = EvalPoint::new(8.0, 1.0);
        assert!((a.eval(s) - {
            let h = p.at(s);
            let (x1, _) = crate::series::l_value(&z, s, &Shifts::none()).unwrap();
            let (x2, _) = crate::series::l_value(&chi, s, &Shifts::none()).unwrap();
            h.eval(&[x1, x2])
        })
        .norm()
            < 1e-9);
    }
}
