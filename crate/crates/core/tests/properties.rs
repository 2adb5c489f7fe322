//! Property tests over random inputs for the invariants the modules promise.

use std::f64::consts::TAU;

use lzero::combination::{specialize, CombinationPolynomial, FiniteDirichletSeries};
use lzero::lfunc::{parse_coeff_table, write_coeff_table, LFunction};
use lzero::series::{dirichlet_sum, euler_log_product, l_value, EvalPoint, Shifts};
use lzero::witness::{choose_q_partition, pair_fixed_point, CMatrix, CVector};
use lzero::zeros::{PlainCombination, Target};
use lzero::{arith::is_prime, Complex64};
use proptest::prelude::*;

fn family() -> &'static [LFunction] {
    static LFS: std::sync::OnceLock<Vec<LFunction>> = std::sync::OnceLock::new();
    LFS.get_or_init(|| {
        vec![
            LFunction::character(1, 0, 5000).unwrap(),
            LFunction::character(5, 1, 5000).unwrap(),
            LFunction::character(12, 3, 5000).unwrap(),
            LFunction::newform(12, 5000).unwrap(),
            LFunction::newform(22, 5000).unwrap(),
        ]
    })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn series() -> impl Strategy<Value = FiniteDirichletSeries> {
    prop::collection::vec((1u64..30, complex()), 1..6).prop_map(FiniteDirichletSeries::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Dirichlet sum and Euler product agree within the sum of their reported bounds.
    #[test]
    fn series_tails_are_sound(k in 0usize..5, sigma in 1.3..3.0f64, t in -40.0..40.0f64, m in 50usize..5000) {
        let lf = &family()[k];
        let s = EvalPoint::new(sigma, t);
        let (d, dt) = dirichlet_sum(lf, s, m).unwrap();
        let (log, et) = euler_log_product(lf, s, 1, 5000, &Shifts::none(), true).unwrap();
        let v = log.exp();
        prop_assert!((v - d).norm() <= dt.value + v.norm() * et.value.exp_m1());
    }

    /// Truncated convolution is a commutative, associative, distributive product.
    #[test]
    fn ring_laws(a in series(), b in series(), c in series(), sigma in 0.5..2.0f64, t in -10.0..10.0f64) {
        let s = EvalPoint::new(sigma, t);
        let lim = 100_000;
        let scale = 1.0 + a.abs_weight(0.0) * b.abs_weight(0.0) * c.abs_weight(0.0) + a.abs_weight(0.0) * (b.abs_weight(0.0) + c.abs_weight(0.0));
        let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-13 * scale;
        prop_assert!(close(a.mul_truncated(&b, lim).eval(s), a.eval(s) * b.eval(s)));
        prop_assert!(close(a.mul_truncated(&b, lim).eval(s), b.mul_truncated(&a, lim).eval(s)));
        prop_assert!(close(
            a.mul_truncated(&b, lim).mul_truncated(&c, lim).eval(s),
            a.mul_truncated(&b.mul_truncated(&c, lim), lim).eval(s)
        ));
        let sum = FiniteDirichletSeries::new(b.terms().iter().chain(c.terms()).copied());
        prop_assert!(close(a.mul_truncated(&sum, lim).eval(s), a.eval(s) * (b.eval(s) + c.eval(s))));
    }

    /// The polynomial text format round-trips.
    #[test]
    fn polynomial_text_round_trip(terms in prop::collection::vec((prop::collection::vec(0u32..4, 2), series()), 1..5)) {
        let p = CombinationPolynomial::from_terms(2, terms).unwrap();
        prop_assume!(!p.is_empty());
        let q = CombinationPolynomial::parse(&p.to_text()).unwrap();
        prop_assert_eq!(p, q);
    }

    /// `h_s` at the tail products reproduces `P(L(s))`.
    #[test]
    fn specialization_matches_full_evaluation(
        terms in prop::collection::vec((prop::collection::vec(0u32..3, 2), series()), 1..4),
        y in 2u64..60,
        sigma in 1.5..2.5f64,
        t in -20.0..20.0f64,
    ) {
        let lfs = vec![family()[1].clone(), family()[3].clone()];
        let p = CombinationPolynomial::from_terms(2, terms).unwrap();
        prop_assume!(!p.is_empty());
        let s = EvalPoint::new(sigma, t);
        let h = specialize(&p, &lfs, s, y).unwrap();
        let tails: Vec<Complex64> = lfs
            .iter()
            .map(|lf| {
                let (full, _) = l_value(lf, s, &Shifts::none()).unwrap();
                let (head, _) = euler_log_product(lf, s, 1, y, &Shifts::none(), false).unwrap();
                full / head.exp()
            })
            .collect();
        let (direct, err) = PlainCombination { p, lfs }.eval(s.s()).unwrap();
        prop_assert!((h.eval(&tails) - direct).norm() <= 1e-10 * (1.0 + direct.norm()) + err);
    }

    /// Coefficient files reload exactly.
    #[test]
    fn coefficient_file_round_trip(k in 0usize..5, len in 1usize..400) {
        let lf = &family()[k];
        let table = lf.table.truncated(len);
        let text = write_coeff_table(&lf.spec, &table);
        let (spec, back) = parse_coeff_table(&text, "mem", Some(lf.spec.degree), Some(lf.spec.conductor)).unwrap();
        prop_assert_eq!(spec.degree, lf.spec.degree);
        prop_assert_eq!(back.len(), len);
        for m in 1..=len as u64 {
            prop_assert_eq!(back.get(m), table.get(m));
        }
    }

    /// Every prime above `max(y, q)` lies in exactly one class.
    #[test]
    fn partition_is_exact(y in 10u64..3000, m in 1usize..5, n in 1usize..3, seed in any::<u64>()) {
        let part = choose_q_partition(y, m, n, &[1, 5]);
        let mut x = seed;
        let mut checked = 0;
        while checked < 200 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = part.q.max(y) + 1 + (x >> 40) % 5_000_000;
            if !is_prime(p) || p % 5 == 0 {
                continue;
            }
            checked += 1;
            let hits = (1..=m).flat_map(|i| (1..=n).map(move |k| (i, k))).filter(|&(i, k)| part.residues(i, k).contains(&(p % part.q))).count();
            prop_assert_eq!(hits, 1);
            prop_assert!(part.class_of(p).is_some());
        }
    }

    /// In the admissible regime the undamped pair iteration contracts at every step.
    #[test]
    fn pair_iteration_contracts(
        n in 1usize..3,
        entries in prop::collection::vec(complex(), 8),
        dirs in prop::collection::vec(complex(), 4),
        shrink in 0.05..0.95f64,
        ws in prop::collection::vec((0.0..1.0 / 3.0f64, 0.0..TAU), 2),
    ) {
        let g1 = CMatrix::from_fn(n, n, |i, j| entries[i * n + j]) + CMatrix::identity(n, n) * Complex64::new(3.0, 0.0);
        let mut d = CMatrix::from_fn(n, n, |i, j| dirs[i * n + j]);
        prop_assume!(d.norm() > 1e-6);
        d *= Complex64::new(shrink / (3.0 * (n as f64).sqrt()) / d.norm(), 0.0);
        let g2 = &g1 * (CMatrix::identity(n, n) + &d);
        let w = CVector::from_fn(n, |k, _| 1.0 + Complex64::from_polar(ws[k].0, ws[k].1));
        let sol = pair_fixed_point(&g1, &g2, &w).unwrap();
        prop_assert!(sol.residual <= 1e-10);
        for pair in sol.history.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-15, "{:?}", sol.history);
        }
    }
}

#[test]
fn parallel_prime_sums_do_not_depend_on_workers() {
    let f = |p: u64| (p as f64).powf(-1.1) * (p as f64).ln();
    let one = lzero::primes::par_sum_over_primes(0, 2_000_000, 1, f);
    for w in [2, 3, 7, 64, 100] {
        assert_eq!(lzero::primes::par_sum_over_primes(0, 2_000_000, w, f).to_bits(), one.to_bits());
    }
}
