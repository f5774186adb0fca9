use greenwalks::arith::{crt_combine, rational_reconstruct, word_primes, BigInt, BigRat};
use greenwalks::guess::{guess_rec, GuessConfig};
use greenwalks::lattice::LatticeSpec;
use greenwalks::pfinite::{
    d_to_theta, rec_add, rec_interleave, rec_to_theta_ode_exact, rec_unroll, theta_ode_to_rec, theta_to_d, PolyRec,
    ThetaOde,
};
use greenwalks::poly::IntPoly;
use greenwalks::termgen::terms_factor_dp;
use greenwalks::terms::{Normalization, TermTable};
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::collection::vec;
use proptest::prelude::*;

pub fn poly(c: &[i64]) -> IntPoly {
    IntPoly::from_i64(c)
}

/// Leading coefficient with strictly positive coefficients, so it never vanishes on n ≥ 0.
pub fn positive_poly(max_deg: usize, bound: i64) -> impl Strategy<Value = IntPoly> {
    vec(1..=bound, 1..=max_deg + 1).prop_map(|c| poly(&c))
}

pub fn any_poly(max_deg: usize, bound: i64) -> impl Strategy<Value = IntPoly> {
    vec(-bound..=bound, 1..=max_deg + 1).prop_map(|c| poly(&c))
}

/// Random recurrence whose `p_0` is positive on all n and whose `p_L` is nonzero.
pub fn rec_strategy(max_order: usize, max_deg: usize, bound: i64) -> impl Strategy<Value = PolyRec> {
    (1..=max_order)
        .prop_flat_map(move |l| (positive_poly(max_deg, bound), vec(any_poly(max_deg, bound), l)))
        .prop_filter_map("vanishing tail", |(p0, rest)| {
            if rest.last().is_none_or(|p| p.is_zero()) {
                return None;
            }
            let mut c = vec![p0];
            c.extend(rest);
            PolyRec::new(c).ok()
        })
}

fn rat_residual(rec: &PolyRec, s: &[BigRat], n: usize) -> BigRat {
    rec.coeffs()
        .iter()
        .enumerate()
        .fold(BigRat::zero(), |acc, (l, p)| acc + BigRat::from_integer(p.eval_i64(n as i64)) * &s[n - l])
}

fn unroll_from(rec: &PolyRec, init: &[i64], nmax: usize) -> Vec<BigRat> {
    let init: Vec<BigRat> = init.iter().map(|&x| BigRat::from_integer(BigInt::from(x))).collect();
    rec_unroll(rec, &init[..rec.order()], nmax).unwrap()
}

fn dummy_table(terms: Vec<BigInt>) -> TermTable {
    TermTable::exact(LatticeSpec::new(1, 1).unwrap(), Normalization::Raw, terms, "planted")
}

/// Clears denominators of a rational sequence.
fn integerize(s: &[BigRat]) -> Vec<BigInt> {
    let l = s.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    s.iter().map(|x| (x * BigRat::from_integer(l.clone())).to_integer()).collect()
}

pub type Check = Result<(), TestCaseError>;

pub fn check_ode_rec(rows: &[Vec<i64>]) -> Check {
    let coeffs: Vec<IntPoly> = rows.iter().map(|r| poly(r)).collect();
    let Ok(ode) = ThetaOde::new(coeffs) else { return Ok(()) };
    prop_assume!(ode.coeffs().iter().any(|p| !p.is_zero()));
    let rec = theta_ode_to_rec(&ode);
    prop_assert_eq!(rec_to_theta_ode_exact(&rec), ode.canonical());
    Ok(())
}

pub fn check_theta_d(rows: &[Vec<i64>]) -> Check {
    let coeffs: Vec<IntPoly> = rows.iter().map(|r| poly(r)).collect();
    let Ok(ode) = ThetaOde::new(coeffs) else { return Ok(()) };
    prop_assume!(ode.coeffs().iter().any(|p| !p.is_zero()));
    prop_assert_eq!(d_to_theta(&theta_to_d(&ode)), ode.canonical());
    Ok(())
}

pub fn check_crt(seeds: &[u64]) -> Check {
    let primes = word_primes(seeds.len());
    let residues: Vec<(u64, u64)> = seeds.iter().zip(&primes).map(|(&s, &p)| (s % p, p)).collect();
    let (x, m) = crt_combine(&residues).unwrap();
    let prod = primes.iter().fold(BigInt::one(), |a, &p| a * p);
    prop_assert_eq!(&m, &prod);
    for &(r, p) in &residues {
        prop_assert_eq!(x.mod_floor(&BigInt::from(p)), BigInt::from(r));
    }
    Ok(())
}

pub fn check_ratrecon(num: i64, den: i64) -> Check {
    let residues: Vec<(u64, u64)> = word_primes(3)
        .iter()
        .map(|&p| {
            let pb = BigInt::from(p);
            let dinv = BigInt::from(den).modpow(&(&pb - 2u32), &pb);
            let v = (BigInt::from(num) * dinv).mod_floor(&pb);
            (u64::try_from(v).unwrap(), p)
        })
        .collect();
    let (x, m) = crt_combine(&residues).unwrap();
    let q = rational_reconstruct(&x, &m).unwrap();
    prop_assert_eq!(q, BigRat::new(BigInt::from(num), BigInt::from(den)));
    Ok(())
}

pub fn check_modular_terms(m: usize, extra: usize, n: usize, pi: usize) -> Check {
    let nn = (m + extra).min(5);
    let spec = LatticeSpec::new(m.min(nn), nn).unwrap();
    let p = [101u64, 1_000_003, word_primes(1)[0], word_primes(3)[2]][pi];
    let exact = terms_factor_dp(&spec, n, None);
    let modular = terms_factor_dp(&spec, n, Some(p));
    prop_assert_eq!(exact.mod_floor(&BigInt::from(p)), modular);
    Ok(())
}

pub fn check_rec_add(a: &PolyRec, b: &PolyRec, ia: &[i64], ib: &[i64]) -> Check {
    let sa = unroll_from(a, ia, 199);
    let sb = unroll_from(b, ib, 199);
    let sum: Vec<BigRat> = sa.iter().zip(&sb).map(|(x, y)| x + y).collect();
    let c = rec_add(a, b).unwrap();
    prop_assert!(c.order() <= a.order() + b.order());
    for n in c.order()..200 {
        prop_assert!(rat_residual(&c, &sum, n).is_zero(), "residual at {}", n);
    }
    Ok(())
}

pub fn check_interleave(a: &PolyRec, init: &[i64], offset: usize) -> Check {
    let s = unroll_from(a, init, 59);
    let mut b = vec![BigRat::zero(); 2 * s.len() + offset];
    for (m, x) in s.iter().enumerate() {
        b[2 * m + offset] = x.clone();
    }
    let c = rec_interleave(a, offset);
    prop_assert_eq!(c.order(), 2 * a.order());
    for (l, p) in c.coeffs().iter().enumerate() {
        let expect_zero = l % 2 == 1 || a.coeffs()[l / 2].is_zero();
        prop_assert_eq!(expect_zero, p.is_zero());
    }
    for n in c.order() + offset..b.len() {
        prop_assert!(rat_residual(&c, &b, n).is_zero(), "residual at {}", n);
    }
    Ok(())
}

pub fn check_planted(planted: &PolyRec, init: &[i64], scale: i64) -> Check {
    let g = planted.coeffs().iter().skip(1).fold(planted.coeffs()[0].clone(), |g, p| g.gcd(p));
    prop_assume!(g.degree() == Some(0));
    prop_assume!(init[..planted.order()].iter().any(|&x| x != 0));
    let terms = integerize(&unroll_from(planted, init, 99));
    let cfg = GuessConfig { max_order: 4, max_degree: 6, ..Default::default() };
    let report = guess_rec(&dummy_table(terms.clone()), &cfg).unwrap();
    let found = report.rec().cloned();
    prop_assert_eq!(found.as_ref(), Some(&planted.canonical()));
    let scaled: Vec<BigInt> = terms.iter().map(|t| t * scale).collect();
    let again = guess_rec(&dummy_table(scaled), &cfg).unwrap();
    prop_assert_eq!(again.rec().cloned(), found);
    Ok(())
}
