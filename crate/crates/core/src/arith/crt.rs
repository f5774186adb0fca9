use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ArithError;

/// Combines residues `value mod prime` into the unique value in `[0, ∏ primes)`.
///
/// Returns `(value, modulus)`.
pub fn crt_combine(residues: &[(u64, u64)]) -> Result<(BigInt, BigInt), ArithError> {
    let mut acc = CrtAccumulator::new();
    for &(v, p) in residues {
        acc.push(v, p)?;
    }
    Ok((acc.value, acc.modulus))
}

/// Incremental Garner-style CRT.
#[derive(Clone, Debug)]
pub struct CrtAccumulator {
    value: BigInt,
    modulus: BigInt,
    primes: Vec<u64>,
}

impl Default for CrtAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl CrtAccumulator {
    pub fn new() -> Self {
        CrtAccumulator { value: BigInt::zero(), modulus: BigInt::one(), primes: Vec::new() }
    }

    pub fn push(&mut self, residue: u64, prime: u64) -> Result<(), ArithError> {
        if self.primes.contains(&prime) {
            return Err(ArithError::DuplicatePrime(prime));
        }
        if residue >= prime {
            return Err(ArithError::ResidueRange { residue, prime });
        }
        let p = BigInt::from(prime);
        // value + modulus * k ≡ residue (mod p)
        let m_mod_p = self.modulus.mod_floor(&p);
        let inv = mod_inverse(&m_mod_p, &p).ok_or(ArithError::DuplicatePrime(prime))?;
        let diff = (BigInt::from(residue) - &self.value).mod_floor(&p);
        let k = (diff * inv).mod_floor(&p);
        self.value += &self.modulus * k;
        self.modulus *= p;
        self.primes.push(prime);
        Ok(())
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// The representative in `(-m/2, m/2]`.
    pub fn symmetric(&self) -> BigInt {
        symmetric_lift(&self.value, &self.modulus)
    }
}

pub fn symmetric_lift(value: &BigInt, modulus: &BigInt) -> BigInt {
    let v = value.mod_floor(modulus);
    if &v * 2 > *modulus {
        v - modulus
    } else {
        v
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.abs().is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}
