//! Constant term of `σ_M(Y_1, …, Y_N)^n` by filling factors one variable at a time.
//!
//! Each of the `n` factors of the power picks an `M`-subset of the variables.
//! Scanning the variables in order, the state records how many factors have
//! picked `t` variables so far (`c_0, …, c_M`). At variable `i`, `m_t` of the
//! `c_{t−1}` factors in class `t−1` take it; the variable then appears with
//! exponent `d = Σ m_t` and contributes `CT (x + 1/x)^d`.
//!
//! States whose low classes can no longer be completed by the remaining
//! variables are dropped, which forces most moves near the end of the scan.

use num_bigint::BigInt;
use rayon::prelude::*;

use super::TermgenError;
use crate::arith::{primes_for_bits, word_primes, CrtAccumulator, FactorialTable, PrimeField};
use crate::lattice::LatticeSpec;
use crate::terms::{Normalization, TermTable};

struct Scan<'a> {
    f: &'a PrimeField,
    fact: &'a FactorialTable,
    m: usize,
    stride: Vec<usize>,
    /// classes below `lo` must be empty after the current variable
    lo: usize,
}

impl Scan<'_> {
    /// Enumerates `m_t` for `t = class+1 ..= M`; `prev_m` is `m_class`.
    #[allow(clippy::too_many_arguments)]
    fn moves(
        &self,
        c: &[usize],
        class: usize,
        prev_m: usize,
        d: usize,
        w: u64,
        idx: usize,
        next: &mut [u64],
    ) {
        let f = self.f;
        let t = class + 1;
        let avail = c[class];
        if t == self.m {
            // innermost: class M−1 and M are both settled here
            let (start, end) = if class < self.lo {
                let forced = avail + prev_m;
                if prev_m != 0 {
                    return;
                }
                (forced, forced)
            } else {
                (0, avail)
            };
            let mut mm = start + ((d + start) & 1);
            while mm <= end {
                let c_low = avail - mm + prev_m;
                let c_top = c[self.m] + mm;
                let wt = f.mul(f.mul(w, self.fact.binom(avail, mm)), self.fact.ct_power(d + mm));
                let j = idx + c_low * self.stride[class] + c_top * self.stride[self.m];
                next[j] = f.add(next[j], wt);
                mm += 2;
            }
            return;
        }
        let (start, end) = if class < self.lo {
            if prev_m != 0 {
                return;
            }
            (avail, avail)
        } else {
            (0, avail)
        };
        for mt in start..=end {
            let c_new = avail - mt + prev_m;
            let wt = f.mul(w, self.fact.binom(avail, mt));
            self.moves(c, t, mt, d + mt, wt, idx + c_new * self.stride[class], next);
        }
    }
}

/// `r(n) mod p` from a factorial table built for `p` with `max ≥ n`.
pub fn factor_dp_mod(spec: &LatticeSpec, n: usize, fact: &FactorialTable) -> u64 {
    let f = fact.field();
    if n == 0 {
        return f.leave(f.one());
    }
    if n % 2 == 1 && spec.odd_terms_vanish() {
        return 0;
    }
    let (big_m, big_n) = (spec.m(), spec.n());
    let base = n + 1;
    // stride[0] is unused: class 0 is implied by the total n
    let mut stride = vec![0usize; big_m + 1];
    let mut s = 1;
    for t in 1..=big_m {
        stride[t] = s;
        s *= base;
    }
    let size = s;
    let mut cur = vec![0u64; size];
    let mut next = vec![0u64; size];
    cur[0] = f.one();
    let mut c = vec![0usize; big_m + 1];
    for i in 1..=big_n {
        let scan = Scan { f, fact, m: big_m, stride: stride.clone(), lo: (big_m + i).saturating_sub(big_n) };
        next.iter_mut().for_each(|x| *x = 0);
        for (idx, &amp) in cur.iter().enumerate() {
            if amp == 0 {
                continue;
            }
            let mut rest = idx;
            let mut used = 0;
            for t in 1..=big_m {
                c[t] = rest % base;
                rest /= base;
                used += c[t];
            }
            c[0] = n - used;
            scan.moves(&c, 0, 0, 0, amp, 0, &mut next);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    f.leave(cur[n * stride[big_m]])
}

fn bits_bound(spec: &LatticeSpec, n: usize) -> f64 {
    n as f64 * (spec.coordination_number() as f64).log2() + 1.0
}

/// `r(n)` exactly (CRT over enough word primes) or modulo `modulus`.
pub fn terms_factor_dp(spec: &LatticeSpec, n: usize, modulus: Option<u64>) -> BigInt {
    match modulus {
        Some(p) => {
            let fact = FactorialTable::new(PrimeField::new(p), n.max(1));
            BigInt::from(factor_dp_mod(spec, n, &fact))
        }
        None => {
            let primes = word_primes(primes_for_bits(bits_bound(spec, n)));
            let residues: Vec<u64> = primes
                .par_iter()
                .map(|&p| factor_dp_mod(spec, n, &FactorialTable::new(PrimeField::new(p), n.max(1))))
                .collect();
            let mut acc = CrtAccumulator::new();
            for (&r, &p) in residues.iter().zip(&primes) {
                acc.push(r, p).expect("distinct primes");
            }
            acc.value().clone()
        }
    }
}

/// Raw table `r(0..=nmax)` by the factor DP, exact or modulo one prime.
pub fn factor_dp_table(spec: &LatticeSpec, nmax: usize, modulus: Option<u64>) -> Result<TermTable, TermgenError> {
    let terms: Vec<BigInt> = (0..=nmax).into_par_iter().map(|n| terms_factor_dp(spec, n, modulus)).collect();
    Ok(TermTable { spec: *spec, norm: Normalization::Raw, modulus, terms, method: "factor-dp".to_string() })
}
