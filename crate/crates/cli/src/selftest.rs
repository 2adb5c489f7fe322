//! Randomized property suites for the lemma-level building blocks, all driven by the
//! self-test stream of the run seed.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use lzero::arith::is_prime;
use lzero::combination::{monomial_test, nonzero_root, CombinationPolynomial, FiniteDirichletSeries, MonomialTest, SpecializedPolynomial};
use lzero::lfunc::LFunction;
use lzero::series::{dirichlet_sum, euler_log_product, EvalPoint, Shifts};
use lzero::witness::{
    choose_q_partition, pair_fixed_point, phase_average, random_k_tuple, torus_residual, two_unit_split, e, CMatrix, CVector, MatrixTuple, TorusParam,
};
use lzero::zeros::{simul_approx, ApproxParams, PhaseTarget, Tolerance};
use lzero::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::output::{stream, STREAM_SELFTEST};

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    /// First failing case, if any.
    pub failure: Option<String>,
    /// Worst observed value of the suite's tested quantity.
    pub worst: f64,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,cases,status,worst\n");
        for s in &self.suites {
            let _ = writeln!(out, "{},{},{},{:.3e}", s.name, s.cases, if s.failure.is_none() { "pass" } else { "fail" }, s.worst);
        }
        out
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.suites
            .iter()
            .map(|s| match &s.failure {
                None => format!("selftest {}: PASS ({} cases, worst {:.3e})", s.name, s.cases, s.worst),
                Some(f) => format!("selftest {}: FAIL ({f})", s.name),
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.suites.iter().filter(|s| s.failure.is_some()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Runs a suite: `case` returns the tested quantity, or a failure message.
fn suite<F>(name: &'static str, cases: usize, rng: &mut ChaCha8Rng, mut case: F) -> SuiteResult
where
    F: FnMut(&mut ChaCha8Rng) -> Result<f64, String>,
{
    let mut worst = 0.0f64;
    for k in 0..cases {
        match case(rng) {
            Ok(v) => worst = worst.max(v),
            Err(msg) => return SuiteResult { name, cases, failure: Some(format!("case {k}: {msg}")), worst },
        }
    }
    SuiteResult { name, cases, failure: None, worst }
}

fn polydisk(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::from_polar(rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..TAU)))
}

fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Every prime above `max(y, q)` lands in exactly one class.
fn partition_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("partition", cases, rng, |rng| {
        let y = rng.gen_range(10..2000u64);
        let (m, n) = (rng.gen_range(1..=4usize), rng.gen_range(1..=2usize));
        let part = choose_q_partition(y, m, n, &[1]);
        let mut checked = 0;
        while checked < 100 {
            let p = rng.gen_range(part.q.max(y) + 1..10_000_000u64);
            if !is_prime(p) {
                continue;
            }
            checked += 1;
            let hits: Vec<(usize, usize)> =
                (1..=m).flat_map(|i| (1..=n).map(move |k| (i, k))).filter(|&(i, k)| part.residues(i, k).contains(&(p % part.q))).collect();
            if hits.len() != 1 || part.class_of(p) != Some(hits[0]) {
                return Err(format!("p = {p}, q = {}: classes {hits:?}, class_of {:?}", part.q, part.class_of(p)));
            }
        }
        Ok(0.0)
    })
}

fn split_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("two_unit_split", cases, rng, |rng| {
        let z = 1.0 + Complex64::from_polar(rng.gen_range(0.0..2.0 / 3.0), rng.gen_range(0.0..TAU));
        let (a, b) = two_unit_split(z).map_err(|e| e.to_string())?;
        let err = (a + b - z).norm().max((a.norm() - 1.0).abs()).max((b.norm() - 1.0).abs());
        if err > 1e-14 {
            return Err(format!("z = {z}: error {err:e}"));
        }
        Ok(err)
    })
}

/// `|sum e(theta_j) v_j| <= sqrt(sum |v_j|^2)`.
fn phase_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("phase_average", cases, rng, |rng| {
        let (count, dim) = (rng.gen_range(1..40usize), rng.gen_range(1..4usize));
        let vs: Vec<CVector> = (0..count).map(|_| CVector::from_fn(dim, |_, _| cgauss(rng))).collect();
        let th = phase_average(&vs);
        let total = vs.iter().zip(&th).fold(CVector::zeros(dim), |acc, (v, &t)| acc + v * e(t));
        let bound = vs.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
        let ratio = total.norm() / bound;
        if ratio > 1.0 + 1e-12 {
            return Err(format!("ratio {ratio}"));
        }
        Ok(ratio)
    })
}

/// Pair fixed point for `||Delta|| <= 1/(3 sqrt 2)` scaled by 0.1..1, `w` near 1.
fn pair_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("pair_fixed_point", cases, rng, |rng| {
        let n = rng.gen_range(1..=2usize);
        let g1 = CMatrix::from_fn(n, n, |_, _| cgauss(rng)) + CMatrix::identity(n, n) * Complex64::new(2.0, 0.0);
        let mut d = CMatrix::from_fn(n, n, |_, _| cgauss(rng));
        d *= Complex64::new(rng.gen_range(0.01..0.1) / (3.0 * 2f64.sqrt()) / d.norm(), 0.0);
        let g2 = &g1 * (CMatrix::identity(n, n) + &d);
        let w = CVector::from_fn(n, |_, _| 1.0 + Complex64::from_polar(rng.gen_range(0.0..1.0 / 3.0), rng.gen_range(0.0..TAU)));
        let sol = pair_fixed_point(&g1, &g2, &w).map_err(|e| e.to_string())?;
        let again = (&sol.t1 + (CMatrix::identity(n, n) + &d) * &sol.t2 - &w).norm();
        if again > 1e-10 {
            return Err(format!("residual {again:e}"));
        }
        Ok(again)
    })
}

/// Torus parametrization on clustered tuples: residual and exact unimodularity.
fn torus_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut params: Vec<(usize, MatrixTuple, TorusParam)> = Vec::new();
    for n in [1, 2] {
        let built = random_k_tuple(rng, n, 3 * n * 48, 0.05, 2.0).and_then(|t| TorusParam::build(&t).map(|p| (t, p)));
        match built {
            Ok((t, p)) => params.push((n, t, p)),
            Err(e) => return SuiteResult { name: "torus_param", cases, failure: Some(e.to_string()), worst: 0.0 },
        }
    }
    let mut k = 0;
    suite("torus_param", cases, rng, |rng| {
        let (n, tuple, param) = &params[k % params.len()];
        k += 1;
        let z = polydisk(rng, *n);
        let t = param.eval(&z).map_err(|e| e.to_string())?;
        let res = torus_residual(tuple, &t, &z);
        let unit = t.iter().flat_map(|v| v.iter()).map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
        if res > 1e-8 || unit > 1e-15 {
            return Err(format!("n = {n}: residual {res:e}, unimodularity {unit:e}"));
        }
        Ok(res)
    })
}

/// `|exp(log Euler product) - Dirichlet sum|` within the sum of both reported bounds.
fn series_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let len = 4000;
    let lfs = [
        LFunction::character(1, 0, len),
        LFunction::character(5, 1, len),
        LFunction::character(7, 2, len),
        LFunction::newform(12, len),
    ];
    let lfs: Vec<LFunction> = match lfs.into_iter().collect() {
        Ok(v) => v,
        Err(e) => return SuiteResult { name: "series_tails", cases, failure: Some(e.to_string()), worst: 0.0 },
    };
    suite("series_tails", cases, rng, |rng| {
        let lf = &lfs[rng.gen_range(0..lfs.len())];
        let s = EvalPoint::new(rng.gen_range(1.5..3.0), rng.gen_range(-30.0..30.0));
        let m = rng.gen_range(100..len);
        let (d, dt) = dirichlet_sum(lf, s, m).map_err(|e| e.to_string())?;
        let (log, et) = euler_log_product(lf, s, 1, len as u64, &Shifts::none(), true).map_err(|e| e.to_string())?;
        let v = log.exp();
        let budget = dt.value + v.norm() * et.value.exp_m1();
        let gap = (v - d).norm();
        if gap > budget {
            return Err(format!("{} at {:?}, M = {m}: gap {gap:e} > {budget:e}", lf.spec.label, s));
        }
        Ok(gap / budget)
    })
}

/// Single terms are monomials; two distinct terms have a verified nonzero root.
fn monomial_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("monomial_dichotomy", cases, rng, |rng| {
        let n = rng.gen_range(1..=3usize);
        let exps = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(0..3u32)).collect::<Vec<_>>();
        let coeff = |rng: &mut ChaCha8Rng| FiniteDirichletSeries::new([(1, Complex64::new(1.0, 0.0)), (rng.gen_range(2..5u64), cgauss(rng) * 0.5)]);
        let d0 = exps(rng);
        let mono = CombinationPolynomial::from_terms(n, [(d0.clone(), coeff(rng))]).map_err(|e| e.to_string())?;
        if !matches!(monomial_test(&mono), Ok(MonomialTest::Monomial { .. })) {
            return Err("single term not reported as monomial".into());
        }
        let mut d1 = exps(rng);
        while d1 == d0 {
            d1 = exps(rng);
        }
        let two = CombinationPolynomial::from_terms(n, [(d0, coeff(rng)), (d1, coeff(rng))]).map_err(|e| e.to_string())?;
        if !matches!(monomial_test(&two), Ok(MonomialTest::NonMonomial { .. })) {
            return Err("two terms reported as monomial".into());
        }
        let h: SpecializedPolynomial = two.at(EvalPoint::new(1.0, rng.gen_range(-10.0..10.0)));
        let y = nonzero_root(&h, rng).map_err(|e| e.to_string())?;
        let rel = h.eval(&y).norm() / h.scale_at(&y);
        if rel > 1e-10 || y.iter().any(|v| v.norm() == 0.0) {
            return Err(format!("root residual {rel:e}"));
        }
        Ok(rel)
    })
}

/// Ring laws of truncated Dirichlet convolution, checked through evaluation.
fn ring_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("dirichlet_ring", cases, rng, |rng| {
        let series = |rng: &mut ChaCha8Rng| FiniteDirichletSeries::new((1..=rng.gen_range(1..8u64)).map(|m| (m, cgauss(rng))));
        let (a, b, c) = (series(rng), series(rng), series(rng));
        let limit = 1000;
        let s = EvalPoint::new(rng.gen_range(1.0..3.0), rng.gen_range(-20.0..20.0));
        let ab = a.mul_truncated(&b, limit);
        let ba = b.mul_truncated(&a, limit);
        let ab_c = ab.mul_truncated(&c, limit);
        let a_bc = a.mul_truncated(&b.mul_truncated(&c, limit), limit);
        let scale = 1.0 + a.abs_weight(1.0) * b.abs_weight(1.0) * c.abs_weight(1.0);
        let err = [
            (ab.eval(s) - a.eval(s) * b.eval(s)).norm(),
            (ab.eval(s) - ba.eval(s)).norm(),
            (ab_c.eval(s) - a_bc.eval(s)).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
            / scale;
        if err > 1e-13 {
            return Err(format!("relative error {err:e}"));
        }
        Ok(err)
    })
}

/// Simultaneous approximation for three random phases at tolerance 0.05.
fn approx_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    suite("simul_approx", cases, rng, |rng| {
        let primes = vec![2, 3, 5];
        let shifts: Vec<f64> = primes.iter().map(|_| rng.gen_range(-100.0..100.0)).collect();
        let target = PhaseTarget::unweighted(primes, shifts).map_err(|e| e.to_string())?;
        let tol = Tolerance::MaxPhase(0.05);
        let a = simul_approx(&target, tol, ApproxParams::default()).map_err(|e| e.to_string())?;
        if a.discrepancy > 0.05 {
            return Err(format!("discrepancy {}", a.discrepancy));
        }
        Ok(a.discrepancy)
    })
}

/// All suites; `cases` per suite (the partition and approximation suites use a tenth).
pub fn run_selftest(seed: u64, cases: usize) -> SelftestReport {
    let mut rng = stream(seed, STREAM_SELFTEST);
    let cases = cases.max(1);
    let few = cases.div_ceil(10);
    let suites = vec![
        partition_suite(&mut rng, few),
        split_suite(&mut rng, cases),
        phase_suite(&mut rng, cases),
        pair_suite(&mut rng, cases),
        torus_suite(&mut rng, cases),
        series_suite(&mut rng, cases),
        monomial_suite(&mut rng, cases),
        ring_suite(&mut rng, cases),
        approx_suite(&mut rng, few),
    ];
    SelftestReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_reproducible() {
        let a = run_selftest(11, 10);
        assert!(a.all_passed(), "{:?}", a.summary_lines());
        assert_eq!(a.to_csv(), run_selftest(11, 10).to_csv());
    }
}
