//! Number-theoretic transform over 62-bit primes `c * 2^k + 1` in Montgomery form.

use crate::arith::{factorize, is_prime, pow_mod};

#[derive(Clone, Copy, Debug)]
pub struct Montgomery {
    pub modulus: u64,
    neg_inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus % 2 == 1 && modulus < (1 << 62));
        let mut inv = modulus;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus.wrapping_mul(inv)));
        }
        let r = (1u128 << 64) % modulus as u128;
        let r2 = (r * r % modulus as u128) as u64;
        Montgomery { modulus, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.modulus as u128) >> 64) as u64;
        self.canonical(u)
    }

    /// Maps `[0, 2p)` to `[0, p)` without a branch (random residues defeat prediction).
    #[inline(always)]
    fn canonical(&self, x: u64) -> u64 {
        let r = x.wrapping_sub(self.modulus);
        r.wrapping_add(self.modulus & ((r as i64) >> 63) as u64)
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.canonical(a + b)
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let r = a.wrapping_sub(b);
        r.wrapping_add(self.modulus & ((r as i64) >> 63) as u64)
    }

    pub fn to_mont(&self, a: u64) -> u64 {
        self.reduce((a % self.modulus) as u128 * self.r2 as u128)
    }

    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    /// Residue of a signed integer, in Montgomery form.
    pub fn from_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.modulus as i64) as u64;
        self.to_mont(r)
    }
}

/// Prime `p = c * 2^k + 1` below 2^62 together with a generator of its 2-power roots.
#[derive(Clone, Copy, Debug)]
pub struct NttPrime {
    pub p: u64,
    pub log2_order: u32,
    /// Primitive `2^log2_order`-th root of unity (plain residue).
    pub root: u64,
}

/// The `count` largest primes below 2^62 that support transforms of length `2^log_len`.
pub fn ntt_primes(log_len: u32, count: usize) -> Vec<NttPrime> {
    let mut out = Vec::with_capacity(count);
    let mut c = ((1u64 << 62) - 1) >> log_len;
    while out.len() < count && c > 0 {
        let p = (c << log_len) + 1;
        if is_prime(p) {
            let mut two_adic = log_len;
            let mut cc = c;
            while cc % 2 == 0 {
                cc /= 2;
                two_adic += 1;
            }
            let fac = factorize(p - 1);
            let g = (2..)
                .find(|&g| fac.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
                .expect("prime has a primitive root");
            let root = pow_mod(g, (p - 1) >> two_adic, p);
            out.push(NttPrime { p, log2_order: two_adic, root });
        }
        c -= 1;
    }
    out
}

/// Transform plan for one prime and one length.
pub struct Ntt {
    pub mont: Montgomery,
    len: usize,
    /// `w^i` for `i < len / 2`, Montgomery form, `w` a primitive `len`-th root.
    twiddles: Vec<u64>,
    len_inv: u64,
}

impl Ntt {
    pub fn new(prime: NttPrime, log_len: u32) -> Self {
        assert!(log_len <= prime.log2_order);
        let mont = Montgomery::new(prime.p);
        let len = 1usize << log_len;
        let w = pow_mod(prime.root, 1u64 << (prime.log2_order - log_len), prime.p);
        let w_m = mont.to_mont(w);
        let mut twiddles = Vec::with_capacity((len / 2).max(1));
        let mut cur = mont.to_mont(1);
        for _ in 0..(len / 2).max(1) {
            twiddles.push(cur);
            cur = mont.mul(cur, w_m);
        }
        let len_inv = mont.to_mont(pow_mod(len as u64 % prime.p, prime.p - 2, prime.p));
        Ntt { mont, len, twiddles, len_inv }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Decimation in frequency; natural order in, bit-reversed order out.
    pub fn forward(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.len);
        let m = &self.mont;
        let n = self.len;
        let mut stage = Vec::with_capacity(n / 2);
        let mut h = n / 2;
        while h >= 1 {
            let tw = self.stage_twiddles(h, &mut stage);
            for block in a.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let (u, v) = (*x, *y);
                    *x = m.add(u, v);
                    *y = m.mul(m.sub(u, v), w);
                }
            }
            h /= 2;
        }
    }

    /// Decimation in time; bit-reversed order in, natural order out, scaled by 1/len.
    pub fn inverse(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.len);
        let m = &self.mont;
        let n = self.len;
        let mut stage = Vec::with_capacity(n / 2);
        let mut h = 1;
        while h < n {
            let tw = self.inverse_stage_twiddles(h, &mut stage);
            for block in a.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let u = *x;
                    let v = m.mul(*y, w);
                    *x = m.add(u, v);
                    *y = m.sub(u, v);
                }
            }
            h *= 2;
        }
        for x in a.iter_mut() {
            *x = m.mul(*x, self.len_inv);
        }
    }

    /// `w_{2h}^j` for `j < h`, gathered contiguously (the full table is strided).
    fn stage_twiddles<'a>(&'a self, h: usize, buf: &'a mut Vec<u64>) -> &'a [u64] {
        let stride = self.len / (2 * h);
        if stride == 1 {
            return &self.twiddles[..h];
        }
        buf.clear();
        buf.extend((0..h).map(|j| self.twiddles[j * stride]));
        buf
    }

    /// `w_{2h}^{-j}` for `j < h`, using `w^{-i} = -w^{len/2 - i}`.
    fn inverse_stage_twiddles<'a>(&'a self, h: usize, buf: &'a mut Vec<u64>) -> &'a [u64] {
        let stride = self.len / (2 * h);
        let half = self.len / 2;
        let m = &self.mont;
        buf.clear();
        buf.push(m.to_mont(1));
        buf.extend((1..h).map(|j| m.sub(0, self.twiddles[half - j * stride])));
        buf
    }

    /// `a <- a * a` as cyclic convolution (Montgomery-form inputs and outputs).
    pub fn square_in_place(&self, a: &mut [u64]) {
        self.forward(a);
        for x in a.iter_mut() {
            *x = self.mont.mul(*x, *x);
        }
        self.inverse(a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery_roundtrip() {
        let p = ntt_primes(10, 1)[0];
        let m = Montgomery::new(p.p);
        for a in [0u64, 1, 2, 12345, p.p - 1] {
            assert_eq!(m.from_mont(m.to_mont(a)), a);
        }
        let a = m.to_mont(123_456_789);
        let b = m.to_mont(987_654_321);
        let expected = (123_456_789u128 * 987_654_321u128 % p.p as u128) as u64;
        assert_eq!(m.from_mont(m.mul(a, b)), expected);
        assert_eq!(m.from_mont(m.from_i64(-5)), p.p - 5);
    }

    #[test]
    fn cyclic_convolution_matches_schoolbook() {
        let prime = ntt_primes(12, 2)[1];
        let ntt = Ntt::new(prime, 4);
        let m = ntt.mont;
        let x: Vec<i64> = vec![3, -1, 4, 1, -5, 9, 2, -6];
        let mut expected = vec![0i64; 16];
        for (i, &a) in x.iter().enumerate() {
            for (j, &b) in x.iter().enumerate() {
                expected[i + j] += a * b;
            }
        }
        let mut buf = vec![0u64; 16];
        for (i, &v) in x.iter().enumerate() {
            buf[i] = m.from_i64(v);
        }
        ntt.square_in_place(&mut buf);
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(m.from_mont(buf[i]), m.from_mont(m.from_i64(e)), "index {i}");
        }
    }
}
