//! Composition sums for the lattices with `M = N − 1`.
//!
//! With `c(j) = binom(j, j/2)` for even `j` and 0 otherwise,
//!
//! ```text
//! r(2n)   = (2n)!   · [x^n]            ( Σ_k c(2(n−k)) / (2k)!   · x^k )^N
//! r(2n+1) = (2n+1)! · [x^(n−(N−1)/2)]  ( Σ_k c(2(n−k)) / (2k+1)! · x^k )^N   (N odd)
//! ```
//!
//! and `r(2n+1) = 0` for even `N`. Everything runs modulo word primes and is
//! recombined by CRT against the bound `r(n) ≤ q^n`.

use num_bigint::BigInt;
use rayon::prelude::*;

use super::{multimodular, TermgenError};
use crate::arith::{FactorialTable, PrimeField};
use crate::lattice::LatticeSpec;
use crate::terms::{Normalization, TermTable};

/// `[x^target] s^N` for a series truncated at `target`.
fn power_coeff(f: &PrimeField, s: &[u64], n: usize, target: usize) -> u64 {
    let len = target + 1;
    let mut acc = s[..len].to_vec();
    for _ in 1..n - 1 {
        let mut next = vec![0u64; len];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in s[..len - i].iter().enumerate() {
                next[i + j] = f.add(next[i + j], f.mul(a, b));
            }
        }
        acc = next;
    }
    // last factor only contributes to the target coefficient
    let mut out = 0;
    for i in 0..len {
        out = f.add(out, f.mul(acc[i], s[target - i]));
    }
    out
}

fn heracles_mod(spec: &LatticeSpec, nmax: usize, p: u64) -> Vec<u64> {
    let f = PrimeField::new(p);
    let big_n = spec.n();
    let fact = FactorialTable::new(f, nmax + 1);
    let central = |j: usize| fact.ct_power(j);
    let mut out = vec![0u64; nmax + 1];
    out[0] = f.one();
    for m in 1..=nmax {
        let n = m / 2;
        if m % 2 == 0 {
            let s: Vec<u64> = (0..=n).map(|k| f.mul(central(2 * (n - k)), fact.inv_fact(2 * k))).collect();
            out[m] = f.mul(fact.fact(m), if big_n == 1 { s[n] } else { power_coeff(&f, &s, big_n, n) });
        } else if big_n % 2 == 1 && n >= (big_n - 1) / 2 {
            let target = n - (big_n - 1) / 2;
            let s: Vec<u64> = (0..=n).map(|k| f.mul(central(2 * (n - k)), fact.inv_fact(2 * k + 1))).collect();
            out[m] = f.mul(fact.fact(m), if big_n == 1 { s[target] } else { power_coeff(&f, &s, big_n, target) });
        }
    }
    out.into_iter().map(|x| f.leave(x)).collect()
}

/// Exact `r(n)` for `n ≤ nmax` on a lattice with `M = N − 1`.
pub fn terms_heracles(spec: &LatticeSpec, nmax: usize) -> Result<TermTable, TermgenError> {
    if spec.m() + 1 != spec.n() {
        return Err(TermgenError::Unsupported { method: "heracles", m: spec.m(), n: spec.n() });
    }
    let q = spec.coordination_number();
    let terms: Vec<BigInt> = multimodular(q, nmax, |primes| {
        primes.par_iter().map(|&p| heracles_mod(spec, nmax, p)).collect()
    });
    Ok(TermTable::exact(*spec, Normalization::Raw, terms, "heracles"))
}
