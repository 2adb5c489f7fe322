//! Dirichlet characters with a frozen indexing convention.
//!
//! The unit group `(Z/qZ)^*` is split by the Chinese remainder theorem into cyclic
//! components, ordered as follows:
//!
//! * the 2-part: nothing for `2 | q` exactly once; `<-1>` of order 2 for `4 || q`;
//!   `<-1>` then `<5>` (order `2^{e-2}`) for `2^e || q`, `e >= 3`;
//! * then one component per odd prime power `p^k || q`, ascending in `p`, generated
//!   by the least primitive root modulo `p^k`.
//!
//! An index `0 <= index < phi(q)` is read in mixed radix over the component orders
//! (first component least significant): `index = c_0 + n_0 (c_1 + n_1 (c_2 + ...))`.
//! The character sends the generator of component `i` to `exp(2 pi i c_i / n_i)`.
//! Index 0 is the principal character.

use num_complex::Complex64;

use crate::arith::{euler_phi, factorize, gcd, least_primitive_root};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Component {
    /// Prime power modulus of this CRT factor (for the 2-part, the full `2^e`).
    modulus: u64,
    generator: u64,
    order: u64,
    /// `dlog[r]` for residues `r` mod `modulus` in this cyclic factor.
    dlog: Vec<Option<u64>>,
}

/// Exact `exp(2 pi i k / n)`, with the four quarter turns returned exactly.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
}

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    modulus: u64,
    index: u64,
    /// `values[r] = chi(r)` for `0 <= r < modulus`.
    values: Vec<Complex64>,
    conductor: u64,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, index: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be >= 1".into()));
        }
        let order = euler_phi(modulus);
        if index >= order {
            return Err(Error::CharacterIndex { index, order });
        }
        let components = components(modulus);
        let mut exps = Vec::with_capacity(components.len());
        let mut rest = index;
        for c in &components {
            exps.push(rest % c.order);
            rest /= c.order;
        }
        let lcm = components.iter().fold(1u64, |acc, c| acc / gcd(acc, c.order) * c.order);
        let mut values = vec![Complex64::new(0.0, 0.0); modulus as usize];
        for r in 0..modulus {
            if gcd(r, modulus) != 1 {
                continue;
            }
            let mut phase = 0u64;
            for (c, &e) in components.iter().zip(&exps) {
                let local = component_log(c, r);
                phase = (phase + (e * local % c.order) * (lcm / c.order)) % lcm;
            }
            values[r as usize] = root_of_unity(phase, lcm);
        }
        if modulus == 1 {
            values[0] = Complex64::new(1.0, 0.0);
        }
        let mut chi = DirichletCharacter { modulus, index, values, conductor: modulus };
        chi.conductor = chi.compute_conductor();
        Ok(chi)
    }

    pub fn all(modulus: u64) -> Result<Vec<Self>> {
        (0..euler_phi(modulus)).map(|i| Self::new(modulus, i)).collect()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn value(&self, m: u64) -> Complex64 {
        self.values[(m % self.modulus) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Index of the complex-conjugate character under the same convention.
    pub fn conjugate_index(&self) -> u64 {
        let comps = components(self.modulus);
        let mut rest = self.index;
        let mut out = 0;
        let mut radix = 1;
        for c in &comps {
            let e = rest % c.order;
            rest /= c.order;
            out += ((c.order - e) % c.order) * radix;
            radix *= c.order;
        }
        out
    }

    fn compute_conductor(&self) -> u64 {
        let q = self.modulus;
        let mut divs = crate::arith::divisors(q);
        divs.sort_unstable();
        for d in divs {
            let induced = (1..q)
                .filter(|&m| gcd(m, q) == 1 && m % d == 1 % d)
                .all(|m| (self.value(m) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            if induced {
                return d;
            }
        }
        q
    }
}

fn components(modulus: u64) -> Vec<Component> {
    let mut out = Vec::new();
    for (p, k) in factorize(modulus) {
        let pk = p.pow(k);
        if p == 2 {
            if k >= 2 {
                out.push(cyclic_component(pk, pk - 1, 2));
            }
            if k >= 3 {
                out.push(cyclic_component(pk, 5, pk / 4));
            }
        } else {
            let g = least_primitive_root(pk).expect("odd prime powers are cyclic");
            out.push(cyclic_component(pk, g, pk / p * (p - 1)));
        }
    }
    out
}

/// For the 2-part, the `<-1>` factor is the one whose generator is `modulus - 1`;
/// the `<5>` factor logs residues after the sign is removed.
fn cyclic_component(modulus: u64, generator: u64, order: u64) -> Component {
    let mut dlog = vec![None; modulus as usize];
    let mut x = 1u64;
    for e in 0..order {
        dlog[x as usize] = Some(e);
        x = x * generator % modulus;
    }
    Component { modulus, generator, order, dlog }
}

fn component_log(c: &Component, r: u64) -> u64 {
    let x = r % c.modulus;
    if c.modulus % 2 == 0 {
        let negative = x % 4 == 3;
        if c.generator == c.modulus - 1 {
            return u64::from(negative);
        }
        let y = if negative { c.modulus - x } else { x };
        return c.dlog[y as usize].expect("residue 1 mod 4 lies in <5>");
    }
    c.dlog[x as usize].expect("unit residue")
}
