//! Closure under addition: a common left multiple of two recurrences.
//!
//! For a recurrence `a` of order α, every shift `f(n−ℓ)` of a solution can be
//! rewritten in the basis `f(n), …, f(n−α+1)` by solving `a` for its last
//! term. A candidate `c = Σ c_ℓ S^{−ℓ}` annihilates all solutions of `a` and
//! `b` iff both rewritten combinations vanish, which is a linear system over
//! `Q(n)` solved fraction-free over `Z[n]`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{PfiniteError, PolyRec};
use crate::arith::{PrimeField, word_primes};
use crate::poly::IntPoly;

/// Rows `Σ_ℓ c_ℓ·N_{ℓ,i}·(D_k/D_ℓ) = 0`, one per basis index `i < α`.
fn reduction_rows(a: &PolyRec, k: usize) -> Vec<Vec<IntPoly>> {
    let alpha = a.order();
    let cs = a.coeffs();
    // scaled[m][i] = N_{m,i} · D_current / D_m
    let mut scaled: Vec<Vec<IntPoly>> = Vec::with_capacity(k + 1);
    for m in 0..alpha.min(k + 1) {
        let mut row = vec![IntPoly::zero(); alpha];
        row[m] = IntPoly::constant(1.into());
        scaled.push(row);
    }
    for l in alpha..=k {
        // a_α(n−ℓ+α)·f(n−ℓ) = −Σ_{j<α} a_j(n−ℓ+α)·f(n−ℓ+α−j)
        let s = alpha as i64 - l as i64;
        let mut next = vec![IntPoly::zero(); alpha];
        for (j, aj) in cs.iter().enumerate().take(alpha) {
            if aj.is_zero() {
                continue;
            }
            let ajs = aj.shift(s);
            let m = l - alpha + j;
            for i in 0..alpha {
                if !scaled[m][i].is_zero() {
                    next[i] = &next[i] - &(&ajs * &scaled[m][i]);
                }
            }
        }
        let f = cs[alpha].shift(s);
        for row in scaled.iter_mut() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = &*e * &f;
                }
            }
        }
        scaled.push(next);
    }
    (0..alpha).map(|i| (0..=k).map(|l| scaled[l][i].clone()).collect()).collect()
}

fn size_key(p: &IntPoly) -> (usize, u64) {
    (p.degree().unwrap_or(0), p.coeffs().iter().map(|c| c.bits()).max().unwrap_or(0))
}

fn remove_row_content(row: &mut [IntPoly]) {
    let g = row.iter().fold(BigInt::zero(), |g, p| g.gcd(&p.content()));
    if !g.is_zero() && g != 1.into() {
        for p in row.iter_mut() {
            *p = p.div_exact(&g);
        }
    }
}

/// Fraction-free Gauss–Jordan elimination; returns a nullspace vector if the rank is deficient.
fn nullspace_vector(mut rows: Vec<Vec<IntPoly>>, cols: usize) -> Option<Vec<IntPoly>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut used_rows = vec![false; rows.len()];
    let mut used_cols = vec![false; cols];
    loop {
        rows.iter_mut().for_each(|r| remove_row_content(r));
        let mut best: Option<(usize, usize, (usize, u64))> = None;
        for (r, row) in rows.iter().enumerate() {
            if used_rows[r] {
                continue;
            }
            for (c, e) in row.iter().enumerate() {
                if used_cols[c] || e.is_zero() {
                    continue;
                }
                let key = size_key(e);
                if best.as_ref().is_none_or(|b| key < b.2) {
                    best = Some((r, c, key));
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        used_rows[pr] = true;
        used_cols[pc] = true;
        pivots.push((pr, pc));
        let prow = rows[pr].clone();
        let pv = prow[pc].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            // drop a shared polynomial factor when it is cheap to find
            let (mul_row, mul_piv) = match (pv.degree(), factor.degree()) {
                (Some(0), _) | (_, Some(0)) => {
                    let g = pv.content().gcd(&factor.content());
                    (pv.div_exact(&g), factor.div_exact(&g))
                }
                _ => (pv.clone(), factor),
            };
            for (c, e) in row.iter_mut().enumerate() {
                let lhs = if e.is_zero() { IntPoly::zero() } else { &*e * &mul_row };
                let rhs = if prow[c].is_zero() { IntPoly::zero() } else { &prow[c] * &mul_piv };
                *e = &lhs - &rhs;
            }
        }
    }
    let free = (0..cols).find(|&c| !used_cols[c])?;
    // c_free = lcm of the pivots touching the free column
    let mut lcm = IntPoly::constant(1.into());
    for &(r, c) in &pivots {
        if !rows[r][free].is_zero() {
            let p = &rows[r][c];
            let g = lcm.gcd(p);
            lcm = (&lcm * p).div_poly(&g).expect("gcd divides");
        }
    }
    let mut sol = vec![IntPoly::zero(); cols];
    sol[free] = lcm.clone();
    for &(r, c) in &pivots {
        let e = &rows[r][free];
        if e.is_zero() {
            continue;
        }
        let q = lcm.div_poly(&rows[r][c]).expect("pivot divides lcm");
        sol[c] = -&(e * &q);
    }
    // remove the common polynomial factor, smallest entries first
    let mut order: Vec<&IntPoly> = sol.iter().filter(|p| !p.is_zero()).collect();
    order.sort_by_key(|p| size_key(p));
    let mut g = order[0].clone();
    for p in &order[1..] {
        if g.degree() == Some(0) {
            break;
        }
        g = g.gcd(p);
    }
    if g.degree().is_some_and(|d| d > 0) {
        for p in sol.iter_mut() {
            if !p.is_zero() {
                *p = p.div_poly(&g).expect("common factor divides");
            }
        }
    }
    Some(sol)
}

/// A recurrence annihilating `f + g` whenever `a·f = 0` and `b·g = 0`.
///
/// Orders are tried from `max(α, β)` up to `α + β`, so the result is a least
/// common left multiple. Valid for `n ≥ order` away from integer zeros of the
/// inputs' last coefficients.
pub fn rec_add(a: &PolyRec, b: &PolyRec) -> Result<PolyRec, PfiniteError> {
    let (alpha, beta) = (a.order(), b.order());
    for k in alpha.max(beta)..=alpha + beta {
        let mut rows = reduction_rows(a, k);
        rows.extend(reduction_rows(b, k));
        if let Some(sol) = nullspace_vector(rows, k + 1) {
            return Ok(PolyRec::from_untrimmed(sol)?.canonical());
        }
    }
    Err(PfiniteError::NoLclm(alpha + beta))
}

/// Nonnegative integer roots of `p`, ascending.
pub fn integer_roots(p: &IntPoly) -> Result<Vec<u64>, PfiniteError> {
    const LIMIT: f64 = 2.0e7;
    let Some(v) = p.valuation() else { return Ok(Vec::new()) };
    let q = p.div_xk(v);
    let mut roots = Vec::new();
    if v > 0 {
        roots.push(0);
    }
    let d = q.degree().unwrap_or(0);
    if d == 0 {
        return Ok(roots);
    }
    // Fujiwara: every root has modulus below 2·max |a_{d−i}/a_d|^{1/i}
    let log2 = |x: &BigInt| -> f64 {
        let bits = x.bits();
        if bits < 1000 {
            x.to_f64().unwrap().abs().log2()
        } else {
            let shift = bits - 60;
            (x >> shift).to_f64().unwrap().abs().log2() + shift as f64
        }
    };
    let lead = log2(q.leading().unwrap());
    let mut bound = f64::NEG_INFINITY;
    for i in 1..=d {
        let c = &q.coeffs()[d - i];
        if !c.is_zero() {
            bound = bound.max((log2(c) - lead) / i as f64);
        }
    }
    let bound = 2.0 * bound.exp2();
    if bound > LIMIT {
        return Err(PfiniteError::RootBound);
    }
    let f = PrimeField::new(word_primes(1)[0]);
    let red = q.reduce(&f);
    for x in 1..=bound.ceil() as u64 {
        let xm = f.enter(x);
        let mut acc = 0;
        for &c in red.iter().rev() {
            acc = f.add(f.mul(acc, xm), c);
        }
        if acc == 0 && q.eval(&BigInt::from(x)).is_zero() {
            roots.push(x);
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfinite::rec_unroll_int;
    use num_traits::One;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn constant_coefficient_sum() {
        let a = PolyRec::from_i64(&[&[1], &[-1]]).unwrap();
        let b = PolyRec::from_i64(&[&[1], &[-2]]).unwrap();
        let c = rec_add(&a, &b).unwrap();
        assert_eq!(c, PolyRec::from_i64(&[&[1], &[-3], &[2]]).unwrap());
    }

    #[test]
    fn self_sum_is_self() {
        let cat = PolyRec::from_i64(&[&[1, 1], &[2, -4]]).unwrap();
        let c = rec_add(&cat, &cat).unwrap();
        assert_eq!(c.order(), 1);
        let seq = rec_unroll_int(&cat, &ints(&[2]), 30).unwrap();
        assert!(c.first_failure(&seq, c.order(), None).is_none());
    }

    #[test]
    fn polynomial_sum() {
        // n! and 2^n
        let fact = PolyRec::from_i64(&[&[1], &[0, -1]]).unwrap();
        let pow2 = PolyRec::from_i64(&[&[1], &[-2]]).unwrap();
        let c = rec_add(&fact, &pow2).unwrap();
        assert_eq!(c.order(), 2);
        let f = rec_unroll_int(&fact, &ints(&[1]), 40).unwrap();
        let g = rec_unroll_int(&pow2, &ints(&[3]), 40).unwrap();
        let s: Vec<BigInt> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        assert!(c.first_failure(&s, c.order(), None).is_none());
    }

    #[test]
    fn roots() {
        // (n − 3)(n − 7)(n + 2) n
        let p = &(&IntPoly::from_i64(&[-3, 1]) * &IntPoly::from_i64(&[-7, 1]))
            * &(&IntPoly::from_i64(&[2, 1]) * &IntPoly::from_i64(&[0, 1]));
        assert_eq!(integer_roots(&p).unwrap(), vec![0, 3, 7]);
        assert_eq!(integer_roots(&IntPoly::constant(BigInt::one())).unwrap(), Vec::<u64>::new());
    }
}
