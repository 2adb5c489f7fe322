//! L-function data: identities, normalized Dirichlet coefficients and Euler factors
//! for Dirichlet characters, level-1 cusp eigenforms and external tables.

mod character;
mod io;
pub mod ntt;
pub mod qexp;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

pub use character::{root_of_unity, DirichletCharacter};
pub use io::{load_coeff_table, parse_coeff_table, write_coeff_table};

use crate::arith::{euler_phi, factorize, gcd};
use crate::error::{Error, Result};
use crate::primes::{primes_up_to, SpfSieve};

/// Slack allowed on the Ramanujan bound `|lambda(p)| <= degree`.
pub const RAMANUJAN_SLACK: f64 = 1e-9;

/// Default truncation lengths.
pub const DEFAULT_M_DEGREE1: usize = 1_000_000;
pub const DEFAULT_M_DEGREE2: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LKind {
    DirichletCharacter { modulus: u64, index: u64 },
    Level1Newform { weight: u32 },
    External { source: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LFunctionSpec {
    pub kind: LKind,
    pub degree: usize,
    pub conductor: u64,
    pub label: String,
}

impl LFunctionSpec {
    pub fn character(modulus: u64, index: u64) -> Result<Self> {
        let chi = DirichletCharacter::new(modulus, index)?;
        Ok(LFunctionSpec {
            kind: LKind::DirichletCharacter { modulus, index },
            degree: 1,
            conductor: chi.conductor(),
            label: format!("chi_{modulus}_{index}"),
        })
    }

    pub fn newform(weight: u32) -> Result<Self> {
        qexp::check_weight(weight)?;
        Ok(LFunctionSpec {
            kind: LKind::Level1Newform { weight },
            degree: 2,
            conductor: 1,
            label: format!("newform_k{weight}"),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 || self.conductor == 0 {
            return Err(Error::InvalidArgument("degree and conductor must be >= 1".into()));
        }
        match &self.kind {
            LKind::DirichletCharacter { modulus, index } => {
                let chi = DirichletCharacter::new(*modulus, *index)?;
                if self.degree != 1 || self.conductor != chi.conductor() {
                    return Err(Error::InvalidArgument(format!(
                        "character spec must have degree 1 and conductor {}",
                        chi.conductor()
                    )));
                }
            }
            LKind::Level1Newform { weight } => {
                qexp::check_weight(*weight)?;
                if self.degree != 2 || self.conductor != 1 {
                    return Err(Error::InvalidArgument("level-1 newform has degree 2, conductor 1".into()));
                }
            }
            LKind::External { .. } => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Storage {
    /// Values of a periodic (character) sequence over one period.
    Periodic(Arc<Vec<Complex64>>),
    /// Prime values of a degree-2, trivial-nebentypus Hecke eigenform; prime powers by
    /// the Hecke recursion, composites by multiplicativity.
    Hecke { primes: Arc<Vec<u64>>, values: Arc<Vec<Complex64>>, count: usize },
    /// Explicit values `lambda(1..=M)`.
    Dense(Arc<Vec<Complex64>>),
}

/// Normalized Dirichlet coefficients `lambda(1..=M)`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    len: usize,
    storage: Storage,
    roots: BTreeMap<u64, Vec<Complex64>>,
}

impl CoefficientTable {
    pub fn periodic(values: Vec<Complex64>, len: usize) -> Self {
        CoefficientTable { len, storage: Storage::Periodic(Arc::new(values)), roots: BTreeMap::new() }
    }

    pub fn dense(values: Vec<Complex64>) -> Self {
        CoefficientTable { len: values.len(), storage: Storage::Dense(Arc::new(values)), roots: BTreeMap::new() }
    }

    pub fn with_roots(mut self, roots: BTreeMap<u64, Vec<Complex64>>) -> Self {
        self.roots = roots;
        self
    }

    /// Truncation length `M`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Periodic tables extend past `M`: any index can be evaluated.
    pub fn is_periodic(&self) -> bool {
        matches!(self.storage, Storage::Periodic(_))
    }

    /// Period of a periodic table.
    pub fn period(&self) -> Option<usize> {
        match &self.storage {
            Storage::Periodic(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn explicit_roots(&self) -> &BTreeMap<u64, Vec<Complex64>> {
        &self.roots
    }

    /// `lambda(m)` for `1 <= m <= M`.
    pub fn get(&self, m: u64) -> Complex64 {
        assert!(m >= 1 && (m as usize <= self.len || self.is_periodic()), "index {m} outside 1..={}", self.len);
        match &self.storage {
            Storage::Periodic(v) => v[(m % v.len() as u64) as usize],
            Storage::Dense(v) => v[m as usize - 1],
            // same multiplication order as `dense_prefix`, so both agree bitwise
            Storage::Hecke { .. } => factorize(m)
                .into_iter()
                .rev()
                .fold(Complex64::new(1.0, 0.0), |acc, (p, k)| self.hecke_power(self.prime_value(p), k) * acc),
        }
    }

    /// `lambda(p)` for a prime `p <= M`.
    pub fn prime_value(&self, p: u64) -> Complex64 {
        match &self.storage {
            Storage::Hecke { primes, values, count } => {
                let i = primes[..*count].binary_search(&p).expect("prime within table");
                values[i]
            }
            _ => self.get(p),
        }
    }

    fn hecke_power(&self, lp: Complex64, k: u32) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let (mut prev, mut cur) = (one, lp);
        if k == 0 {
            return one;
        }
        for _ in 1..k {
            let next = lp * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `lambda(1..=n)` as a vector (index `m - 1`).
    pub fn dense_prefix(&self, n: usize) -> Vec<Complex64> {
        let n = if self.is_periodic() { n } else { n.min(self.len) };
        match &self.storage {
            Storage::Periodic(_) => (1..=n as u64).map(|m| self.get(m)).collect(),
            Storage::Dense(v) => v[..n].to_vec(),
            Storage::Hecke { .. } => {
                let sieve = SpfSieve::new(n.max(1));
                let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
                if n >= 1 {
                    out[1] = Complex64::new(1.0, 0.0);
                }
                for m in 2..=n {
                    let (p, k, rest) = sieve.split(m);
                    let pk = if rest == 1 {
                        self.hecke_power(self.prime_value(p as u64), k)
                    } else {
                        out[m / rest]
                    };
                    out[m] = pk * out[rest];
                }
                out.remove(0);
                out
            }
        }
    }

    /// Same data truncated to a shorter length.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len);
        let storage = match &self.storage {
            Storage::Hecke { primes, values, .. } => Storage::Hecke {
                primes: primes.clone(),
                values: values.clone(),
                count: primes.partition_point(|&p| p <= len as u64),
            },
            other => other.clone(),
        };
        CoefficientTable { len, storage, roots: self.roots.range(..=len as u64).map(|(k, v)| (*k, v.clone())).collect() }
    }
}

/// Local roots `alpha_{p,l}` of one Euler factor.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerFactor {
    pub p: u64,
    pub roots: Vec<Complex64>,
}

/// An L-function: identity plus coefficients.
#[derive(Clone, Debug)]
pub struct LFunction {
    pub spec: LFunctionSpec,
    pub table: CoefficientTable,
}

impl LFunction {
    pub fn character(modulus: u64, index: u64, len: usize) -> Result<Self> {
        Ok(LFunction { spec: LFunctionSpec::character(modulus, index)?, table: character_table(modulus, index, len)? })
    }

    pub fn newform(weight: u32, len: usize) -> Result<Self> {
        Ok(LFunction { spec: LFunctionSpec::newform(weight)?, table: newform_coeffs(weight, len)? })
    }

    pub fn euler_factor(&self, p: u64) -> Result<EulerFactor> {
        euler_factor(&self.spec, &self.table, p)
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    /// The Dirichlet character behind a degree-1 character spec.
    pub fn character_data(&self) -> Option<DirichletCharacter> {
        match self.spec.kind {
            LKind::DirichletCharacter { modulus, index } => DirichletCharacter::new(modulus, index).ok(),
            _ => None,
        }
    }
}

/// Values of the character `index` modulo `modulus`, as a table of length `len`.
pub fn character_table(modulus: u64, index: u64, len: usize) -> Result<CoefficientTable> {
    let chi = DirichletCharacter::new(modulus, index)?;
    Ok(CoefficientTable::periodic(chi.values().to_vec(), len))
}

static DEFAULT_CACHE_DIR: Mutex<Option<String>> = Mutex::new(None);

/// Cache directory used when `LZERO_CACHE_DIR` is unset (`"off"` disables caching).
pub fn set_default_cache_dir(dir: &str) {
    *DEFAULT_CACHE_DIR.lock().unwrap_or_else(|e| e.into_inner()) = Some(dir.to_string());
}

fn cache_dir() -> Option<PathBuf> {
    let configured = DEFAULT_CACHE_DIR.lock().unwrap_or_else(|e| e.into_inner()).clone();
    match std::env::var("LZERO_CACHE_DIR").ok().filter(|s| !s.is_empty()).or(configured) {
        Some(s) if s == "off" => None,
        Some(s) => Some(PathBuf::from(s)),
        None => Some(std::env::temp_dir().join("lzero-cache")),
    }
}

struct PrimeData {
    primes: Arc<Vec<u64>>,
    values: Arc<Vec<Complex64>>,
    len: usize,
}

fn newform_store() -> &'static Mutex<HashMap<u32, PrimeData>> {
    static STORE: OnceLock<Mutex<HashMap<u32, PrimeData>>> = OnceLock::new();
    STORE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Prime values from the smallest cached table of this weight with `M' >= len`.
fn read_cached(weight: u32, len: usize, primes: &[u64]) -> Option<Vec<f64>> {
    let dir = cache_dir()?;
    let prefix = format!("newform-k{weight}-M");
    let best = std::fs::read_dir(&dir)
        .ok()?
        .filter_map(|e| {
            let name = e.ok()?.file_name().into_string().ok()?;
            let m: usize = name.strip_prefix(&prefix)?.strip_suffix(".f64")?.parse().ok()?;
            (m >= len).then_some(m)
        })
        .min()?;
    let bytes = std::fs::read(dir.join(format!("{prefix}{best}.f64"))).ok()?;
    if bytes.len() < primes.len() * 8 || bytes.len() % 8 != 0 {
        return None;
    }
    Some(
        bytes
            .chunks_exact(8)
            .take(primes.len())
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}

fn write_cached(weight: u32, len: usize, values: &[f64]) {
    let Some(dir) = cache_dir() else { return };
    if std::fs::create_dir_all(&dir).is_err() {
        return;
    }
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    let tmp = dir.join(format!("newform-k{weight}-M{len}.f64.tmp"));
    if std::fs::write(&tmp, bytes).is_ok() {
        let _ = std::fs::rename(tmp, dir.join(format!("newform-k{weight}-M{len}.f64")));
    }
}

/// Normalized prime coefficients for several weights at once (they share `Delta`).
pub fn newform_tables(weights: &[u32], len: usize) -> Result<Vec<CoefficientTable>> {
    for &k in weights {
        qexp::check_weight(k)?;
    }
    let len = len.max(1);
    let mut store = newform_store().lock().expect("newform store poisoned");
    let missing: Vec<u32> = weights
        .iter()
        .copied()
        .filter(|k| store.get(k).is_none_or(|d| d.len < len))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() {
        let primes = primes_up_to(len as u64);
        let mut todo = Vec::new();
        for &k in &missing {
            match read_cached(k, len, &primes) {
                Some(v) => {
                    let values = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
                    store.insert(k, PrimeData { primes: Arc::new(primes.clone()), values: Arc::new(values), len });
                }
                None => todo.push(k),
            }
        }
        if !todo.is_empty() && !primes.is_empty() {
            let idx: Vec<usize> = primes.iter().map(|&p| p as usize).collect();
            let ints = qexp::cusp_form_coefficients(&todo, len, &idx, true)?;
            for (&k, a) in todo.iter().zip(ints) {
                let half = (k as f64 - 1.0) / 2.0;
                let values: Vec<f64> = a
                    .iter()
                    .zip(&primes)
                    .map(|(ap, &p)| ap.to_f64().expect("finite") / (p as f64).powf(half))
                    .collect();
                for (&v, &p) in values.iter().zip(&primes) {
                    if v.abs() > 2.0 + RAMANUJAN_SLACK {
                        return Err(Error::Ramanujan { p, value: v.abs(), degree: 2 });
                    }
                }
                write_cached(k, len, &values);
                let values = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
                store.insert(k, PrimeData { primes: Arc::new(primes.clone()), values: Arc::new(values), len });
            }
        } else if primes.is_empty() {
            for &k in &todo {
                store.insert(k, PrimeData { primes: Arc::new(Vec::new()), values: Arc::new(Vec::new()), len });
            }
        }
    }
    Ok(weights
        .iter()
        .map(|k| {
            let d = &store[k];
            CoefficientTable {
                len,
                storage: Storage::Hecke {
                    primes: d.primes.clone(),
                    values: d.values.clone(),
                    count: d.primes.partition_point(|&p| p <= len as u64),
                },
                roots: BTreeMap::new(),
            }
        })
        .collect())
}

/// Ramanujan-normalized coefficients `lambda(m) = a(m) m^{-(k-1)/2}` of the level-1
/// cusp eigenform of the given weight.
pub fn newform_coeffs(weight: u32, len: usize) -> Result<CoefficientTable> {
    Ok(newform_tables(&[weight], len)?.remove(0))
}

/// Exact unnormalized coefficients `a(1..=len)`.
pub fn newform_integer_coeffs(weight: u32, len: usize) -> Result<Vec<BigInt>> {
    let idx: Vec<usize> = (1..=len).collect();
    Ok(qexp::cusp_form_coefficients(&[weight], len, &idx, false)?.remove(0))
}

/// Local roots at `p`.
pub fn euler_factor(spec: &LFunctionSpec, table: &CoefficientTable, p: u64) -> Result<EulerFactor> {
    if p as usize > table.len() && !table.is_periodic() {
        return Err(Error::Precondition(format!("p = {p} beyond table length {}", table.len())));
    }
    let lp = table.prime_value(p);
    if lp.norm() > spec.degree as f64 + RAMANUJAN_SLACK {
        return Err(Error::Ramanujan { p, value: lp.norm(), degree: spec.degree });
    }
    if let Some(roots) = table.roots.get(&p) {
        return Ok(EulerFactor { p, roots: roots.clone() });
    }
    let roots = match (&spec.kind, spec.degree) {
        (LKind::DirichletCharacter { .. }, _) | (LKind::External { .. }, 1) => {
            if lp.norm() == 0.0 {
                Vec::new()
            } else {
                vec![lp]
            }
        }
        (_, 2) if spec.conductor == 1 => {
            // x^2 - lambda x + 1
            let disc = (lp * lp - 4.0).sqrt();
            let mut r = vec![(lp + disc) / 2.0, (lp - disc) / 2.0];
            if lp.im == 0.0 && lp.re.abs() <= 2.0 {
                let re = lp.re / 2.0;
                let im = (1.0 - re * re).max(0.0).sqrt();
                r = vec![Complex64::new(re, im), Complex64::new(re, -im)];
            }
            r
        }
        _ => {
            return Err(Error::Precondition(format!(
                "no explicit Euler factor roots for {} at p = {p}",
                spec.label
            )))
        }
    };
    Ok(EulerFactor { p, roots })
}

/// `q^{-s} zeta(s, a/q) = (1/phi(q)) sum_chi conj(chi(a)) L(s, chi)`.
pub fn hurwitz_decomposition(a: u64, q: u64) -> Result<Vec<(Complex64, LFunctionSpec)>> {
    if q == 0 || gcd(a, q) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    let phi = euler_phi(q) as f64;
    DirichletCharacter::all(q)?
        .into_iter()
        .map(|chi| Ok((chi.value(a).conj() / phi, LFunctionSpec::character(q, chi.index())?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn character_table_examples() {
        let t = character_table(4, 1, 100).unwrap();
        assert_eq!(t.get(3), Complex64::new(-1.0, 0.0));
        let t = character_table(5, 1, 100).unwrap();
        assert_eq!(t.get(2), Complex64::new(0.0, 1.0));
        assert_eq!(t.get(3), Complex64::new(0.0, -1.0));
        let t = character_table(1, 0, 100).unwrap();
        assert!((1..=100).all(|m| t.get(m) == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn newform_integer_values() {
        let a = newform_integer_coeffs(12, 3).unwrap();
        assert_eq!(a[0], BigInt::from(1));
        assert_eq!(a[1], BigInt::from(-24));
        let b = newform_integer_coeffs(16, 2).unwrap();
        assert_eq!(b[1], BigInt::from(216));
    }

    #[test]
    fn hecke_table_agrees_with_exact_expansion() {
        for &k in &qexp::SUPPORTED_WEIGHTS {
            let m = 600;
            let table = newform_coeffs(k, m).unwrap();
            let exact = newform_integer_coeffs(k, m).unwrap();
            let half = (k as f64 - 1.0) / 2.0;
            let dense = table.dense_prefix(m);
            for n in 1..=m {
                let expect = exact[n - 1].to_f64().unwrap() / (n as f64).powf(half);
                assert!((dense[n - 1].re - expect).abs() < 1e-9 * expect.abs().max(1.0), "k={k} n={n}");
                assert!(close(table.get(n as u64), dense[n - 1], 1e-9));
            }
            assert_eq!(table.get(1), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn euler_factor_examples() {
        let spec = LFunctionSpec::newform(12).unwrap();
        let double = CoefficientTable::dense(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
        let f = euler_factor(&spec, &double, 2).unwrap();
        assert!(f.roots.iter().all(|r| close(*r, Complex64::new(1.0, 0.0), 1e-12)));

        let lf = LFunction::newform(12, 100).unwrap();
        let f = lf.euler_factor(2).unwrap();
        let l2 = -24.0 / 2f64.powf(5.5);
        let theta = (l2 / 2.0).acos();
        assert!((l2 - (-0.5303300858899106)).abs() < 1e-15);
        assert!(close(f.roots[0], Complex64::from_polar(1.0, theta), 1e-12));
        assert!(close(f.roots[1], Complex64::from_polar(1.0, -theta), 1e-12));

        let chi4 = LFunction::character(4, 1, 100).unwrap();
        assert!(chi4.euler_factor(2).unwrap().roots.is_empty());
    }

    #[test]
    fn ramanujan_violation_rejected() {
        let spec = LFunctionSpec::newform(12).unwrap();
        let bad = CoefficientTable::dense(vec![Complex64::new(1.0, 0.0), Complex64::new(2.5, 0.0)]);
        assert!(matches!(euler_factor(&spec, &bad, 2), Err(Error::Ramanujan { p: 2, .. })));
    }

    #[test]
    fn roots_reconstruct_prime_powers() {
        let lf = LFunction::newform(12, 20_000).unwrap();
        for p in (2..140u64).filter(|&p| is_prime(p)) {
            let f = lf.euler_factor(p).unwrap();
            for r in &f.roots {
                assert!((r.norm() - 1.0).abs() < 1e-9);
            }
            let mut pk = 1u64;
            for k in 1..=4u32 {
                pk *= p;
                if pk > 20_000 {
                    break;
                }
                // lambda(p^k) = h_k(alpha, beta) = sum_{i=0}^k alpha^i beta^{k-i}
                let (a, b) = (f.roots[0], f.roots[1]);
                let h: Complex64 = (0..=k).map(|i| a.powu(i) * b.powu(k - i)).sum();
                assert!(close(h, lf.table.get(pk), 1e-8), "p={p} k={k}");
            }
            let s: Complex64 = f.roots.iter().sum();
            assert!(close(s, lf.table.prime_value(p), 1e-9));
        }
    }

    #[test]
    fn hurwitz_decomposition_examples() {
        let d = hurwitz_decomposition(1, 1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].0, Complex64::new(1.0, 0.0));
        assert!(matches!(hurwitz_decomposition(2, 4), Err(Error::NotCoprime { a: 2, q: 4 })));

        // term-by-term: the combined coefficients are the indicator of n = 1 mod 4
        let d = hurwitz_decomposition(1, 4).unwrap();
        assert_eq!(d.len(), 2);
        for (c, _) in &d {
            assert!(close(*c, Complex64::new(0.5, 0.0), 1e-15));
        }
        for n in 1..=20u64 {
            let combined: Complex64 = d
                .iter()
                .map(|(c, spec)| match spec.kind {
                    LKind::DirichletCharacter { modulus, index } => {
                        c * DirichletCharacter::new(modulus, index).unwrap().value(n)
                    }
                    _ => unreachable!(),
                })
                .sum();
            let expected = if n % 4 == 1 { 1.0 } else { 0.0 };
            assert!(close(combined, Complex64::new(expected, 0.0), 1e-15), "n={n}");
        }
    }
}
