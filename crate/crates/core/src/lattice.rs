//! Multi-headed lattices: step sets, structure functions and a seeded walker.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("invalid lattice M={m} N={n}: need 1 <= M <= N")]
    Invalid { m: usize, n: usize },
    #[error("horizon and trial counts must be positive")]
    EmptyRun,
}

/// The lattice whose steps change exactly `m` of `n` coordinates by ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct LatticeSpec {
    m: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    m: usize,
    n: usize,
}

impl TryFrom<RawSpec> for LatticeSpec {
    type Error = LatticeError;
    fn try_from(r: RawSpec) -> Result<Self, LatticeError> {
        LatticeSpec::new(r.m, r.n)
    }
}

impl From<LatticeSpec> for RawSpec {
    fn from(s: LatticeSpec) -> Self {
        RawSpec { m: s.m, n: s.n }
    }
}

impl LatticeSpec {
    pub fn new(m: usize, n: usize) -> Result<Self, LatticeError> {
        if m < 1 || m > n {
            return Err(LatticeError::Invalid { m, n });
        }
        Ok(LatticeSpec { m, n })
    }

    /// Heads per step.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `2^M · binom(N, M)`.
    pub fn coordination_number(&self) -> u64 {
        let mut b: u64 = 1;
        for i in 0..self.m as u64 {
            b = b * (self.n as u64 - i) / (i + 1);
        }
        b << self.m
    }

    /// Odd-length closed walks are impossible exactly when M is odd or M = N.
    pub fn odd_terms_vanish(&self) -> bool {
        self.m % 2 == 1 || self.m == self.n
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} N={}", self.m, self.n)
    }
}

pub fn coordination_number(spec: &LatticeSpec) -> u64 {
    spec.coordination_number()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectionVector {
    pub coords: Vec<i8>,
}

impl DirectionVector {
    pub fn negated(&self) -> Self {
        DirectionVector { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// All step vectors of the lattice in lexicographic order.
pub fn direction_vectors(spec: &LatticeSpec) -> Vec<DirectionVector> {
    let n = spec.n;
    let mut out = Vec::with_capacity(spec.coordination_number() as usize);
    let mut digits = vec![-1i8; n];
    loop {
        if digits.iter().filter(|&&d| d != 0).count() == spec.m {
            out.push(DirectionVector { coords: digits.clone() });
        }
        // odometer increment in base 3 over {-1, 0, 1}, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if digits[i] < 1 {
                digits[i] += 1;
                break;
            }
            digits[i] = -1;
        }
    }
}

/// `σ_M(cos θ_1, …, cos θ_N) / binom(N, M)`.
pub fn structure_function(spec: &LatticeSpec, theta: &[f64]) -> f64 {
    assert_eq!(theta.len(), spec.n, "theta must have N entries");
    // e[k] = elementary symmetric polynomial of degree k
    let mut e = vec![0.0f64; spec.m + 1];
    e[0] = 1.0;
    for &t in theta {
        let c = t.cos();
        for k in (1..=spec.m).rev() {
            e[k] += c * e[k - 1];
        }
    }
    let mut binom = 1.0;
    for i in 0..spec.m {
        binom = binom * (spec.n - i) as f64 / (i + 1) as f64;
    }
    e[spec.m] / binom
}

/// SplitMix64, used with one independent stream per trial.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Index in `0..bound` by the multiply-shift map.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkResult {
    pub returned: bool,
    pub return_step: Option<u64>,
    pub final_site: Vec<i64>,
}

/// A uniform walk from the origin, stopped at the first return or at `horizon`.
pub fn sample_walk(spec: &LatticeSpec, horizon: u64, seed: u64) -> WalkResult {
    let dirs = direction_vectors(spec);
    walk_with(&dirs, spec.n, horizon, seed)
}

fn walk_with(dirs: &[DirectionVector], n: usize, horizon: u64, seed: u64) -> WalkResult {
    let mut rng = SplitMix64::new(seed);
    let mut pos = vec![0i64; n];
    let mut nonzero = 0usize;
    let q = dirs.len() as u64;
    for step in 1..=horizon {
        let v = &dirs[rng.below(q) as usize].coords;
        for (p, &d) in pos.iter_mut().zip(v) {
            if d != 0 {
                let was = *p != 0;
                *p += d as i64;
                match (was, *p != 0) {
                    (true, false) => nonzero -= 1,
                    (false, true) => nonzero += 1,
                    _ => {}
                }
            }
        }
        if nonzero == 0 {
            return WalkResult { returned: true, return_step: Some(step), final_site: pos };
        }
    }
    WalkResult { returned: false, return_step: None, final_site: pos }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub returns: u64,
    pub trials: u64,
}

/// Fraction of `trials` walks returning within `horizon`; trial `i` uses seed `seed ^ i`.
pub fn mc_return_probability(
    spec: &LatticeSpec,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, LatticeError> {
    if horizon == 0 || trials == 0 {
        return Err(LatticeError::EmptyRun);
    }
    let dirs = direction_vectors(spec);
    let returns: u64 = (0..trials)
        .into_par_iter()
        .map(|i| walk_with(&dirs, spec.n, horizon, seed ^ i).returned as u64)
        .sum();
    let p = returns as f64 / trials as f64;
    let stderr = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(McEstimate { estimate: p, stderr, returns, trials })
}
