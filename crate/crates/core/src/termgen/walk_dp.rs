//! Closed-walk counting in position space, reduced by the hyperoctahedral symmetry.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::TermgenError;
use crate::lattice::{direction_vectors, LatticeSpec};
use crate::terms::{Normalization, TermTable};

/// Largest number of orbit representatives kept in memory.
pub const STATE_BUDGET: usize = 5_000_000;

type State = Vec<u16>;

fn canon(pos: &[i32]) -> State {
    let mut s: State = pos.iter().map(|x| x.unsigned_abs() as u16).collect();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// Size of the orbit of a sorted absolute-value vector under signed permutations.
fn orbit_size(s: &[u16]) -> BigUint {
    let n = s.len();
    let mut size = BigUint::from(1u32);
    for i in 2..=n {
        size *= i as u32;
    }
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && s[j] == s[i] {
            j += 1;
        }
        for k in 2..=(j - i) {
            size /= k as u32;
        }
        i = j;
    }
    let nonzero = s.iter().filter(|&&x| x != 0).count();
    size << nonzero
}

/// `r(n)` for `n ≤ nmax`, from walk counts to orbit representatives after `⌈nmax/2⌉` steps.
pub fn terms_walk_dp(spec: &LatticeSpec, nmax: usize) -> Result<TermTable, TermgenError> {
    let dirs: Vec<Vec<i32>> =
        direction_vectors(spec).into_iter().map(|d| d.coords.iter().map(|&c| c as i32).collect()).collect();
    let half = nmax / 2 + 1;
    let origin: State = vec![0; spec.n()];
    let mut layers: Vec<HashMap<State, BigUint>> = Vec::with_capacity(half + 1);
    layers.push(HashMap::from([(origin, BigUint::from(1u32))]));
    let mut buf = vec![0i32; spec.n()];
    for _ in 0..half {
        let prev = layers.last().unwrap();
        let mut next: HashMap<State, BigUint> = HashMap::new();
        for x in prev.keys() {
            for v in &dirs {
                for (b, (&xi, &vi)) in buf.iter_mut().zip(x.iter().zip(v)) {
                    *b = xi as i32 + vi;
                }
                next.entry(canon(&buf)).or_default();
            }
        }
        if next.len() > STATE_BUDGET {
            return Err(TermgenError::Budget { states: next.len(), budget: STATE_BUDGET });
        }
        for (y, count) in next.iter_mut() {
            let mut acc = BigUint::zero();
            for v in &dirs {
                for (b, (&yi, &vi)) in buf.iter_mut().zip(y.iter().zip(v)) {
                    *b = yi as i32 - vi;
                }
                if let Some(c) = prev.get(&canon(&buf)) {
                    acc += c;
                }
            }
            *count = acc;
        }
        layers.push(next);
    }
    let mut terms = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let k = n / 2;
        let a = &layers[k];
        let b = &layers[n - k];
        let mut s = BigUint::zero();
        for (x, ca) in a {
            if let Some(cb) = b.get(x) {
                s += orbit_size(x) * ca * cb;
            }
        }
        terms.push(BigInt::from(s));
    }
    Ok(TermTable::exact(*spec, Normalization::Raw, terms, "walk-dp"))
}
