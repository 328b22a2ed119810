//! Arithmetic in Z/p^n.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported modulus; keeps products of residues inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Returns true when `p` is prime (trial division, fine at desk scale).
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The ring Z/p^n as a small copyable handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zmod {
    p: u64,
    n: u32,
    q: u64,
}

impl Zmod {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let mut q: u64 = 1;
        for _ in 0..n {
            q = q.checked_mul(p).ok_or(Error::ModulusTooLarge { p, n })?;
            if q > MAX_MODULUS {
                return Err(Error::ModulusTooLarge { p, n });
            }
        }
        Ok(Zmod { p, n, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// The same prime at another level.
    pub fn with_level(&self, n: u32) -> Result<Self> {
        Zmod::new(self.p, n)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.q
    }
    /// `a + b*c`.
    #[inline]
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        (a + b * c) % self.q
    }
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }
    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }
    /// Symmetric representative in (-q/2, q/2].
    pub fn to_i64(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    /// p-adic valuation, with `val(0) = n`.
    pub fn val(&self, a: u64) -> u32 {
        let mut a = a % self.q;
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// p^k as a residue (zero once k ≥ n).
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// p^k as an integer, for k ≤ n.
    pub fn p_pow_int(&self, k: u32) -> u64 {
        self.p.pow(k)
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut r0, mut r1) = (self.q as i64, (a % self.q) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let qt = r0 / r1;
            (r0, r1) = (r1, r0 - qt * r1);
            (t0, t1) = (t1, t0 - qt * t1);
        }
        Some(self.from_i64(t0))
    }

    /// Writes a nonzero `a` as `p^v * u` and returns `(v, u)` with `u` a unit.
    pub fn split(&self, a: u64) -> (u32, u64) {
        let v = self.val(a);
        if v == self.n {
            return (v, 0);
        }
        (v, (a / self.p.pow(v)) % self.q)
    }

    /// Integer quotient a / p^v for `a` divisible by p^v.
    #[inline]
    pub fn div_p_pow(&self, a: u64, v: u32) -> u64 {
        a / self.p.pow(v)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Zmod::new(4, 1), Err(Error::NotPrime(4)));
        assert_eq!(Zmod::new(3, 0), Err(Error::ZeroLevel));
        assert!(matches!(Zmod::new(2, 40), Err(Error::ModulusTooLarge { .. })));
    }

    #[test]
    fn inverses_and_valuations() {
        let z = Zmod::new(3, 3).unwrap();
        for a in 0..27 {
            if a % 3 != 0 {
                assert_eq!(z.mul(a, z.inv(a).unwrap()), 1);
            } else {
                assert!(z.inv(a).is_none());
            }
        }
        assert_eq!(z.val(0), 3);
        assert_eq!(z.val(18), 2);
        assert_eq!(z.split(18), (2, 2));
        assert_eq!(z.p_pow(3), 0);
    }
}
