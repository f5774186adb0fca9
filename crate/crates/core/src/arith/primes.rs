use serde::{Deserialize, Serialize};

use super::modp::{mul_mod, pow_mod};
use super::ArithError;

/// Witnesses making Miller-Rabin deterministic for every 64-bit input.
const MR_WITNESSES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An ordered list of distinct odd primes used as a multi-modular basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeBasis {
    primes: Vec<u64>,
}

impl PrimeBasis {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Sum of `log2 p` over the basis, i.e. the bit size of the product.
    pub fn bits(&self) -> f64 {
        self.primes.iter().map(|&p| (p as f64).log2()).sum()
    }
}

/// The first `count` primes below `2^bits`, scanning downward.
///
/// Deterministic: the same arguments always give the same list.
pub fn prime_stream(bits: u32, count: usize) -> Result<PrimeBasis, ArithError> {
    if !(30..=62).contains(&bits) {
        return Err(ArithError::PrimeBits(bits));
    }
    let lo = 1u64 << (bits - 1);
    let mut primes = Vec::with_capacity(count);
    let mut candidate = (1u64 << bits) - 1;
    while primes.len() < count {
        if candidate < lo {
            return Err(ArithError::PrimesExhausted { bits, count });
        }
        if is_prime(candidate) {
            primes.push(candidate);
        }
        candidate -= 2;
    }
    Ok(PrimeBasis { primes })
}

/// Primes of 62 bits, the default word size for all multi-modular work.
pub fn word_primes(count: usize) -> Vec<u64> {
    prime_stream(62, count).expect("62-bit primes are plentiful").primes
}

/// Number of 62-bit primes whose product exceeds `2^bits`.
pub fn primes_for_bits(bits: f64) -> usize {
    ((bits + 2.0) / 61.0).ceil().max(1.0) as usize
}
