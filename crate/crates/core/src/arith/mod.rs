//! Exact and modular arithmetic: prime fields, CRT and rational reconstruction.

pub mod combinat;
pub mod crt;
pub mod modp;
pub mod primes;
pub mod ratrecon;

pub use num_bigint::BigInt;

pub use combinat::{binomial, central_binomials, FactorialTable};
pub use crt::{crt_combine, symmetric_lift, CrtAccumulator};
pub use modp::PrimeField;
pub use primes::{is_prime, prime_stream, primes_for_bits, word_primes, PrimeBasis};
pub use ratrecon::{
    rational_reconstruct, rational_reconstruct_bounded, rational_reconstruct_checked,
    reconstruct_vector,
};

/// Reduced fraction with positive denominator.
pub type BigRat = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("prime width {0} outside 30..=62 bits")]
    PrimeBits(u32),
    #[error("fewer than {count} primes of {bits} bits")]
    PrimesExhausted { bits: u32, count: usize },
    #[error("prime {0} appears twice")]
    DuplicatePrime(u64),
    #[error("residue {residue} not reduced modulo {prime}")]
    ResidueRange { residue: u64, prime: u64 },
    #[error("rational reconstruction failed: modulus too small")]
    ReconstructionFailed,
    #[error("reconstruction disagrees with held-out prime {prime}")]
    HeldOutMismatch { prime: u64 },
}
