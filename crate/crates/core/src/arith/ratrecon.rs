//! Rational reconstruction: recovering `n/d` from `n·d^{-1} mod m`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{modp::PrimeField, ArithError, BigRat};

/// Balanced reconstruction with `|n|, d ≤ floor(sqrt(m/2))`.
///
/// `None` means no fraction within the bounds maps to `value`; callers treat
/// it as "modulus too small", not as an error.
pub fn rational_reconstruct(value: &BigInt, modulus: &BigInt) -> Option<BigRat> {
    let bound = (modulus / 2u32).sqrt();
    rational_reconstruct_bounded(value, modulus, &bound, &bound)
}

/// Half-extended Euclid with explicit numerator and denominator bounds.
pub fn rational_reconstruct_bounded(
    value: &BigInt,
    modulus: &BigInt,
    num_bound: &BigInt,
    den_bound: &BigInt,
) -> Option<BigRat> {
    let v = value.mod_floor(modulus);
    if v.is_zero() {
        return Some(BigRat::zero());
    }
    let (mut r0, mut r1) = (modulus.clone(), v);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > num_bound {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.is_zero() || t1.abs() > *den_bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    let (num, den) = if t1.is_negative() { (-r1, -t1) } else { (r1, t1) };
    if !(&num - value * &den).mod_floor(modulus).is_zero() {
        return None;
    }
    Some(BigRat::new(num, den))
}

/// Reconstruction that must also agree with one residue modulo a held-out prime.
pub fn rational_reconstruct_checked(
    value: &BigInt,
    modulus: &BigInt,
    held_out: (u64, u64),
) -> Result<BigRat, ArithError> {
    let q = rational_reconstruct(value, modulus).ok_or(ArithError::ReconstructionFailed)?;
    let (residue, prime) = held_out;
    let f = PrimeField::new(prime);
    let den = f.from_bigint(q.denom());
    if den == 0 {
        return Err(ArithError::HeldOutMismatch { prime });
    }
    let got = f.leave(f.mul(f.from_bigint(q.numer()), f.inv(den)));
    if got != residue % prime {
        return Err(ArithError::HeldOutMismatch { prime });
    }
    Ok(q)
}

/// Reconstructs a projective integer vector from its image modulo `modulus`.
///
/// Entries are reconstructed one at a time after scaling by the running
/// common denominator, so later entries only need to recover integers.
/// The result is primitive (content 1) but its sign is not normalized.
pub fn reconstruct_vector(values: &[BigInt], modulus: &BigInt) -> Option<Vec<BigInt>> {
    let mut den = BigInt::one();
    let mut fracs: Vec<BigRat> = Vec::with_capacity(values.len());
    for v in values {
        let scaled = (v * &den).mod_floor(modulus);
        let q = rational_reconstruct(&scaled, modulus)?;
        let q = q / BigRat::from_integer(den.clone());
        den = den.lcm(q.denom());
        fracs.push(q);
    }
    let mut ints: Vec<BigInt> = fracs.iter().map(|q| q.numer() * (&den / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return None;
    }
    for x in &mut ints {
        *x /= &g;
    }
    Some(ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{crt::crt_combine, word_primes};
    use proptest::prelude::*;

    fn modinv(a: i64, m: i64) -> i64 {
        (1..m).find(|x| (a * x).rem_euclid(m) == 1).unwrap()
    }

    #[test]
    fn worked_examples() {
        // independent check: 5·39 ≡ 1 and 3·39 ≡ 20 (mod 97)
        assert_eq!(modinv(5, 97), 39);
        assert_eq!((3 * 39) % 97, 20);
        let q = rational_reconstruct(&BigInt::from(20), &BigInt::from(97)).unwrap();
        assert_eq!(q, BigRat::new(3.into(), 5.into()));
        let q = rational_reconstruct(&BigInt::from(5), &BigInt::from(1_000_003)).unwrap();
        assert_eq!(q, BigRat::from_integer(5.into()));
        let m = BigInt::from(12345u32);
        assert_eq!(rational_reconstruct(&BigInt::zero(), &m).unwrap(), BigRat::zero());
    }

    #[test]
    fn failure_when_modulus_small() {
        // bound = floor(sqrt(5)) = 2: candidates n/d with |n|,d ≤ 2 are
        // 0, ±1, ±2, ±1/2 whose residues are {0,1,10,2,9,6,5}.
        for v in [3, 4, 7, 8] {
            assert!(rational_reconstruct(&BigInt::from(v), &BigInt::from(11)).is_none(), "{v}");
        }
    }

    #[test]
    fn held_out_mismatch_detected() {
        let primes = word_primes(3);
        // 7/3 reconstructed under the first two primes, checked against a wrong residue
        let residues: Vec<(u64, u64)> = primes[..2]
            .iter()
            .map(|&p| {
                let f = PrimeField::new(p);
                (f.leave(f.mul(f.enter(7), f.inv(f.enter(3)))), p)
            })
            .collect();
        let (v, m) = crt_combine(&residues).unwrap();
        let f = PrimeField::new(primes[2]);
        let good = f.leave(f.mul(f.enter(7), f.inv(f.enter(3))));
        assert!(rational_reconstruct_checked(&v, &m, (good, primes[2])).is_ok());
        assert!(matches!(
            rational_reconstruct_checked(&v, &m, ((good + 1) % primes[2], primes[2])),
            Err(ArithError::HeldOutMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn recovers_fractions(n in -(1i64 << 40)..(1i64 << 40), d in 1i64..(1i64 << 40), k in 2usize..4) {
            let primes = word_primes(k);
            let residues: Vec<(u64, u64)> = primes.iter().map(|&p| {
                let f = PrimeField::new(p);
                (f.leave(f.mul(f.from_i64(n), f.inv(f.from_i64(d)))), p)
            }).collect();
            let (v, m) = crt_combine(&residues).unwrap();
            prop_assert!(BigInt::from(2) * BigInt::from(n).abs() * BigInt::from(d) < m);
            let q = rational_reconstruct(&v, &m).unwrap();
            prop_assert_eq!(q, BigRat::new(n.into(), d.into()));
        }

        #[test]
        fn vectors_recovered(xs in proptest::collection::vec(-1_000_000i64..1_000_000, 2..8)) {
            prop_assume!(xs.iter().any(|&x| x != 0));
            let g = xs.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
            let want: Vec<BigInt> = xs.iter().map(|&x| BigInt::from(x / g)).collect();
            // project: divide by the first nonzero entry modulo the primes
            let primes = word_primes(2);
            let pivot = *xs.iter().find(|&&x| x != 0).unwrap();
            let images: Vec<BigInt> = xs.iter().map(|&x| {
                let residues: Vec<(u64, u64)> = primes.iter().map(|&p| {
                    let f = PrimeField::new(p);
                    (f.leave(f.mul(f.from_i64(x), f.inv(f.from_i64(pivot)))), p)
                }).collect();
                crt_combine(&residues).unwrap().0
            }).collect();
            let m = BigInt::from(primes[0]) * BigInt::from(primes[1]);
            let got = reconstruct_vector(&images, &m).unwrap();
            let neg: Vec<BigInt> = want.iter().map(|x| -x).collect();
            prop_assert!(got == want || got == neg);
        }
    }
}
