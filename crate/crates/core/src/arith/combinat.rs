use num_bigint::BigInt;
use num_traits::One;

use super::modp::PrimeField;

/// Factorials and inverse factorials modulo one prime, in Montgomery form.
///
/// Built once per prime and read-only afterwards.
#[derive(Clone, Debug)]
pub struct FactorialTable {
    field: PrimeField,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl FactorialTable {
    /// Table covering `0..=max`; requires `max < p`.
    pub fn new(field: PrimeField, max: usize) -> Self {
        assert!((max as u64) < field.modulus(), "factorial table exceeds the prime");
        let mut fact = Vec::with_capacity(max + 1);
        let mut acc = field.one();
        fact.push(acc);
        for i in 1..=max {
            acc = field.mul(acc, field.enter(i as u64));
            fact.push(acc);
        }
        let mut inv_fact = vec![0; max + 1];
        inv_fact[max] = field.inv(fact[max]);
        for i in (1..=max).rev() {
            inv_fact[i - 1] = field.mul(inv_fact[i], field.enter(i as u64));
        }
        FactorialTable { field, fact, inv_fact }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn max(&self) -> usize {
        self.fact.len() - 1
    }

    #[inline]
    pub fn fact(&self, n: usize) -> u64 {
        self.fact[n]
    }

    #[inline]
    pub fn inv_fact(&self, n: usize) -> u64 {
        self.inv_fact[n]
    }

    #[inline]
    pub fn binom(&self, n: usize, k: usize) -> u64 {
        if k > n {
            return 0;
        }
        let f = &self.field;
        f.mul(self.fact[n], f.mul(self.inv_fact[k], self.inv_fact[n - k]))
    }

    /// `binom(d, d/2)` for even `d`, zero for odd `d`: the constant term of `(x + 1/x)^d`.
    #[inline]
    pub fn ct_power(&self, d: usize) -> u64 {
        if d % 2 == 1 {
            0
        } else {
            self.binom(d, d / 2)
        }
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Row `n` of Pascal's triangle reused across calls.
pub fn central_binomials(max: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(max + 1);
    let mut c = BigInt::one();
    out.push(c.clone());
    for n in 1..=max as u64 {
        // binom(2n, n) = binom(2n-2, n-1)·(2n)(2n-1)/n²
        c = c * (2 * n) * (2 * n - 1) / (n * n);
        out.push(c.clone());
    }
    out
}
