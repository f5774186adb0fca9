use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::TermgenError;
use crate::arith::{binomial, central_binomials};
use crate::lattice::LatticeSpec;
use crate::terms::{Normalization, TermTable};

/// `Σ_{k_1+…+k_N = m} (m! / ∏ k_i!)²` for `m ≤ mmax`.
fn squared_multinomial_sums(n_dim: usize, mmax: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::one(); mmax + 1];
    let sq: Vec<Vec<BigInt>> = (0..=mmax)
        .map(|m| (0..=m).map(|k| binomial(m as u64, k as u64).pow(2)).collect())
        .collect();
    for _ in 1..n_dim {
        t = (0..=mmax)
            .map(|m| (0..=m).fold(BigInt::zero(), |acc, k| acc + &sq[m][k] * &t[m - k]))
            .collect();
    }
    t
}

/// `r(n)` for `M = N` (`binom(2n,n)^N` at even steps) or `M = 1`.
pub fn terms_closed_form(spec: &LatticeSpec, nmax: usize) -> Result<TermTable, TermgenError> {
    let half = nmax / 2;
    let central = central_binomials(half);
    let even: Vec<BigInt> = if spec.m() == spec.n() {
        central.iter().map(|c| c.pow(spec.n() as u32)).collect()
    } else if spec.m() == 1 {
        let t = squared_multinomial_sums(spec.n(), half);
        central.iter().zip(&t).map(|(c, s)| c * s).collect()
    } else {
        return Err(TermgenError::Unsupported { method: "closed-form", m: spec.m(), n: spec.n() });
    };
    let terms = (0..=nmax).map(|n| if n % 2 == 0 { even[n / 2].clone() } else { BigInt::zero() }).collect();
    Ok(TermTable::exact(*spec, Normalization::Raw, terms, "closed-form"))
}
