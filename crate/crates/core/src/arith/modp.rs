//! Word-size prime field arithmetic in Montgomery form.
//!
//! Elements handed out by [`PrimeField`] are Montgomery residues `a·2^64 mod p`
//! and must only be combined through the same field. Moduli must be odd and
//! below `2^62`, which keeps every intermediate REDC value below `2^127`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;

/// A prime field `Z/pZ` with `p < 2^62`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    /// `-p^{-1} mod 2^64`
    neg_inv: u64,
    /// `2^128 mod p`
    r2: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p > 2 && p < (1u64 << 62), "modulus {p} out of range");
        // Newton iteration for p^{-1} mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        PrimeField { p, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    /// Converts a canonical residue into Montgomery form.
    #[inline]
    pub fn enter(&self, x: u64) -> u64 {
        self.redc((x % self.p) as u128 * self.r2 as u128)
    }

    /// Converts a Montgomery residue back to its canonical value in `[0, p)`.
    #[inline]
    pub fn leave(&self, x: u64) -> u64 {
        self.redc(x as u128)
    }

    #[inline]
    pub fn zero(&self) -> u64 {
        0
    }

    #[inline]
    pub fn one(&self) -> u64 {
        self.enter(1)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Montgomery residue of a signed machine integer.
    pub fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64) as u64;
        self.enter(r)
    }

    /// Montgomery residue of an arbitrary-precision integer.
    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let p = BigUint::from(self.p);
        let r = (x.magnitude() % &p).to_u64().unwrap_or(0);
        let r = if x.sign() == Sign::Minus && r != 0 { self.p - r } else { r };
        self.enter(r)
    }

    pub fn from_biguint(&self, x: &BigUint) -> u64 {
        let r = (x % BigUint::from(self.p)).to_u64().unwrap_or(0);
        self.enter(r)
    }
}

/// Plain `a·b mod m` for any 64-bit modulus (slow path, not Montgomery).
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Plain `base^exp mod m`.
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
