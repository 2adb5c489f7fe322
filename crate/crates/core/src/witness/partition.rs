use crate::arith::{gcd, is_prime};

/// Partition of the primes `p > y` into `m n` classes `S_{ik}` by residue modulo a prime
/// `q = 1 mod mn`: class `(i, k)` holds the residues `t n (i-1) + t (k-1) + l`,
/// `1 <= l <= t`, with `t = (q - 1)/(mn)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimePartition {
    pub y: u64,
    pub q: u64,
    pub m: usize,
    pub n: usize,
    pub t: u64,
}

impl PrimePartition {
    /// `(i, k)`, 1-based, of the class containing `p` (`None` for `p <= y` or `q | p`).
    pub fn class_of(&self, p: u64) -> Option<(usize, usize)> {
        let r = p % self.q;
        if p <= self.y || r == 0 {
            return None;
        }
        let idx = r - 1;
        let tn = self.t * self.n as u64;
        Some(((idx / tn) as usize + 1, ((idx % tn) / self.t) as usize + 1))
    }

    /// Residues modulo `q` making up class `(i, k)`.
    pub fn residues(&self, i: usize, k: usize) -> Vec<u64> {
        let start = self.t * self.n as u64 * (i as u64 - 1) + self.t * (k as u64 - 1);
        (1..=self.t).map(|l| start + l).collect()
    }

    /// Every prime above `y` is classified only when `y >= q`.
    pub fn covers_all_primes_above_y(&self) -> bool {
        self.y >= self.q
    }
}

/// Smallest prime `q = 1 mod mn` not dividing any conductor, and its partition.
pub fn choose_q_partition(y: u64, m: usize, n: usize, conductors: &[u64]) -> PrimePartition {
    assert!(m >= 1 && n >= 1);
    let mn = (m * n) as u64;
    let product_ok = |q: u64| conductors.iter().all(|&c| gcd(c, q) == 1);
    let mut q = 2;
    while !(is_prime(q) && q % mn == 1 % mn && product_ok(q)) {
        q += 1;
    }
    PrimePartition { y, q, m, n, t: (q - 1) / mn }
}
