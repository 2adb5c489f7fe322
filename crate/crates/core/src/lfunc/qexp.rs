//! Exact q-expansions of the level-1 normalized cusp eigenforms of weight
//! 12, 16, 18, 20, 22, 26, as `Delta * E_{k-12}`.
//!
//! All arithmetic is exact: residues modulo several 62-bit NTT primes,
//! recombined by the Chinese remainder theorem. `Delta = q prod (1 - q^n)^24`
//! is built from Jacobi's identity `prod (1 - q^n)^3 = sum (-1)^j (2j+1) q^{j(j+1)/2}`:
//! one sparse squaring gives the sixth power exactly, two NTT squarings give the 24th.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ntt::{ntt_primes, Montgomery, Ntt, NttPrime};
use crate::arith::pow_mod;
use crate::error::{Error, Result};
use crate::primes::SpfSieve;

pub const SUPPORTED_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Eisenstein series `E_k = 1 + c_k sum sigma_{k-1}(n) q^n` for the weights
/// that complement Delta to the supported cusp forms.
fn eisenstein_constant(k: u32) -> Option<i64> {
    match k {
        4 => Some(240),
        6 => Some(-504),
        8 => Some(480),
        10 => Some(-264),
        14 => Some(-24),
        _ => None,
    }
}

pub fn check_weight(weight: u32) -> Result<()> {
    if SUPPORTED_WEIGHTS.contains(&weight) {
        Ok(())
    } else {
        Err(Error::UnsupportedWeight(weight))
    }
}

/// `prod_{n>=1} (1 - q^n)^6` through `q^{len-1}`, exactly.
fn eta6(len: usize) -> Vec<i64> {
    let mut jac = Vec::new();
    let mut j = 0i64;
    loop {
        let e = (j * (j + 1) / 2) as usize;
        if e >= len {
            break;
        }
        let c = if j % 2 == 0 { 2 * j + 1 } else { -(2 * j + 1) };
        jac.push((e, c));
        j += 1;
    }
    let mut out = vec![0i64; len];
    for (a, &(ea, ca)) in jac.iter().enumerate() {
        for &(eb, cb) in &jac[a..] {
            let e = ea + eb;
            if e >= len {
                break;
            }
            let c = ca * cb;
            out[e] += if ea == eb { c } else { 2 * c };
        }
    }
    out
}

/// log2 of an upper bound for `|a(n)|` over the requested indices: `2 n^{(k-1)/2}` at
/// primes (Deligne), `d(n) n^{(k-1)/2} <= 2 sqrt(n) n^{(k-1)/2}` in general.
fn coefficient_bits(weight: u32, max_index: usize, primes_only: bool) -> f64 {
    let n = max_index.max(2) as f64;
    let half = (weight as f64 - 1.0) / 2.0;
    let divisor = if primes_only { 2.0 } else { 2.0 * n.sqrt() };
    divisor.log2() + half * n.log2()
}

/// Residues of `a_k(n)` (Montgomery form) at the requested indices, one vector per weight,
/// for a single transform prime.
fn residues_for_prime(
    weights: &[u32],
    m: usize,
    log_len: u32,
    prime: NttPrime,
    eta6_exact: &[i64],
    sieve: Option<&SpfSieve>,
    indices: &[usize],
) -> Vec<Vec<u64>> {
    let ntt = Ntt::new(prime, log_len);
    let mont = ntt.mont;
    let len = ntt.len();
    // series index e holds the coefficient of q^{e+1} of the final forms
    let mut a = vec![0u64; len];
    for (dst, &v) in a.iter_mut().zip(eta6_exact) {
        *dst = mont.from_i64(v);
    }
    ntt.square_in_place(&mut a);
    a[m..].iter_mut().for_each(|x| *x = 0);
    ntt.square_in_place(&mut a);
    a[m..].iter_mut().for_each(|x| *x = 0);

    let extract = |series: &[u64]| -> Vec<u64> { indices.iter().map(|&n| series[n - 1]).collect() };

    let mut out = vec![Vec::new(); weights.len()];
    for (w, &k) in weights.iter().enumerate() {
        if k == 12 {
            out[w] = extract(&a);
        }
    }
    if weights.iter().any(|&k| k != 12) {
        ntt.forward(&mut a);
        let sieve = sieve.expect("divisor sieve required for k > 12");
        let mut b = vec![0u64; len];
        for (w, &k) in weights.iter().enumerate() {
            if k == 12 {
                continue;
            }
            let e = k - 12;
            let c = eisenstein_constant(e).expect("checked weight");
            fill_eisenstein(&mut b[..m], e - 1, c, &mont, sieve);
            b[m..].iter_mut().for_each(|x| *x = 0);
            ntt.forward(&mut b);
            for (x, y) in b.iter_mut().zip(&a) {
                *x = mont.mul(*x, *y);
            }
            ntt.inverse(&mut b);
            out[w] = extract(&b);
        }
    }
    out
}

/// `b[n] = [n == 0] + c * sigma_j(n)` modulo the prime, Montgomery form.
fn fill_eisenstein(b: &mut [u64], j: u32, c: i64, mont: &Montgomery, sieve: &SpfSieve) {
    let p = mont.modulus;
    let one = mont.to_mont(1);
    let cm = mont.from_i64(c);
    let mut sigma = vec![0u64; b.len()];
    if !sigma.is_empty() {
        b[0] = one;
    }
    if sigma.len() > 1 {
        sigma[1] = one;
    }
    for n in 2..b.len() {
        let (q, e, rest) = sieve.split(n);
        let qj = mont.to_mont(pow_mod(q as u64 % p, j as u64, p));
        // 1 + q^j + ... + q^{je}
        let mut local = one;
        let mut pw = one;
        for _ in 0..e {
            pw = mont.mul(pw, qj);
            local = mont.add(local, pw);
        }
        sigma[n] = mont.mul(local, sigma[rest]);
    }
    for n in 1..b.len() {
        b[n] = mont.mul(cm, sigma[n]);
    }
}

/// Exact integer coefficients `a_k(n)` of the normalized weight-`k` cusp form at the
/// requested indices (each in `1..=m`), one vector per requested weight.
///
/// `primes_only` promises that every index is prime, which lowers the CRT bit budget.
pub fn cusp_form_coefficients(
    weights: &[u32],
    m: usize,
    indices: &[usize],
    primes_only: bool,
) -> Result<Vec<Vec<BigInt>>> {
    for &k in weights {
        check_weight(k)?;
    }
    if m == 0 || indices.iter().any(|&n| n == 0 || n > m) {
        return Err(Error::InvalidArgument(format!("indices must lie in 1..={m}")));
    }
    let max_index = indices.iter().copied().max().unwrap_or(1);
    let bits = weights
        .iter()
        .map(|&k| coefficient_bits(k, max_index, primes_only))
        .fold(0.0, f64::max)
        + 2.0;
    let log_len = (2 * m).next_power_of_two().trailing_zeros().max(1);
    let count = (bits / 61.0).ceil() as usize;
    let primes = ntt_primes(log_len, count.max(1));
    let eta = eta6(m);
    let sieve = if weights.iter().any(|&k| k != 12) { Some(SpfSieve::new(m)) } else { None };

    let mut residues: Vec<Vec<Vec<u64>>> = Vec::with_capacity(primes.len());
    for &prime in &primes {
        let mont = Montgomery::new(prime.p);
        let r = residues_for_prime(weights, m, log_len, prime, &eta, sieve.as_ref(), indices);
        residues.push(
            r.into_iter()
                .map(|v| v.into_iter().map(|x| mont.from_mont(x)).collect())
                .collect(),
        );
    }
    let moduli: Vec<u64> = primes.iter().map(|p| p.p).collect();
    let crt = Crt::new(&moduli);
    Ok((0..weights.len())
        .map(|w| {
            (0..indices.len())
                .map(|i| {
                    let rs: Vec<u64> = residues.iter().map(|r| r[w][i]).collect();
                    crt.signed(&rs)
                })
                .collect()
        })
        .collect())
}

/// Garner recombination with symmetric lift.
struct Crt {
    moduli: Vec<u64>,
    /// `inv[i][j] = moduli[j]^{-1} mod moduli[i]` for `j < i`.
    inv: Vec<Vec<u64>>,
    product: BigInt,
}

impl Crt {
    fn new(moduli: &[u64]) -> Self {
        let inv = moduli
            .iter()
            .enumerate()
            .map(|(i, &mi)| {
                moduli[..i]
                    .iter()
                    .map(|&mj| pow_mod(mj % mi, mi - 2, mi))
                    .collect()
            })
            .collect();
        let product = moduli.iter().fold(BigInt::one(), |acc, &m| acc * m);
        Crt { moduli: moduli.to_vec(), inv, product }
    }

    fn signed(&self, residues: &[u64]) -> BigInt {
        let r = self.moduli.len();
        let mut digits = vec![0u64; r];
        for i in 0..r {
            let mi = self.moduli[i];
            let mut x = residues[i] % mi;
            for j in 0..i {
                let d = digits[j] % mi;
                x = if x >= d { x - d } else { x + mi - d };
                x = crate::arith::mul_mod(x, self.inv[i][j], mi);
            }
            digits[i] = x;
        }
        let mut value = BigInt::zero();
        for i in (0..r).rev() {
            value = value * self.moduli[i] + digits[i];
        }
        if value.clone() * 2 > self.product {
            value - &self.product
        } else {
            value
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Schoolbook expansion of `q prod (1-q^n)^24 * E`, independent of the NTT path.
    fn naive(weight: u32, m: usize) -> Vec<i128> {
        let mut prod = vec![0i128; m];
        prod[0] = 1;
        for n in 1..m {
            for _ in 0..24 {
                for e in (n..m).rev() {
                    prod[e] -= prod[e - n];
                }
            }
        }
        let mut eis = vec![0i128; m];
        eis[0] = 1;
        if weight > 12 {
            let c = eisenstein_constant(weight - 12).unwrap() as i128;
            for n in 1..m {
                let s: i128 = (1..=n).filter(|d| n % d == 0).map(|d| (d as i128).pow(weight - 13)).sum();
                eis[n] = c * s;
            }
        }
        let mut out = vec![0i128; m + 1];
        for i in 0..m {
            for j in 0..m - i {
                out[i + j + 1] += prod[i] * eis[j];
            }
        }
        out
    }

    #[test]
    fn tau_and_weight16_leading_coefficients() {
        let idx: Vec<usize> = (1..=12).collect();
        let got = cusp_form_coefficients(&[12, 16], 12, &idx, false).unwrap();
        let tau: Vec<i64> = got[0].iter().map(|b| i64::try_from(b.clone()).unwrap()).collect();
        assert_eq!(&tau[..6], &[1, -24, 252, -1472, 4830, -6048]);
        assert_eq!(i64::try_from(got[1][1].clone()).unwrap(), 216);
    }

    #[test]
    fn matches_schoolbook_for_all_weights() {
        let m = 40;
        let idx: Vec<usize> = (1..=m).collect();
        let got = cusp_form_coefficients(&SUPPORTED_WEIGHTS, m, &idx, false).unwrap();
        for (w, &k) in SUPPORTED_WEIGHTS.iter().enumerate() {
            let oracle = naive(k, m);
            for n in 1..=m {
                assert_eq!(got[w][n - 1], BigInt::from(oracle[n]), "weight {k}, n {n}");
            }
        }
    }

    #[test]
    fn rejects_bad_weight() {
        assert!(matches!(cusp_form_coefficients(&[14], 10, &[1], false), Err(Error::UnsupportedWeight(14))));
    }
}
